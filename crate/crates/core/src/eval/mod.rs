//! Offline analyses: direction AUC/accuracy, interpolation sweeps, the
//! monotone-and-linear fit verdict, and tracking metrics.

mod auc;
mod direction;
mod fit;
mod sweep;
mod tracking;

use thiserror::Error;

pub use auc::{auc_pair_count, auc_with_se};
pub use direction::{
    direction_outputs, direction_report, direction_report_from_outputs, DirectionReport, DirectionSummary,
    FingerDirection,
};
pub use fit::{fit_verdict, spearman, FitThresholds, FitVerdict};
pub use sweep::{interpolation_sweep, ScaleGrid, SweepCurve};
pub use tracking::{tracking_metrics, TrackingMetrics, MAPE_GUARD};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("both classes must be present (positives {positives}, negatives {negatives})")]
    SingleClass { positives: usize, negatives: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("finger {0} has no flexion or no extension windows in the test set")]
    DegenerateFinger(usize),
    #[error("invalid scale grid {0:?}")]
    BadGrid(String),
}
