use serde::{Deserialize, Serialize};

use super::{auc_with_se, EvalError};
use crate::models::ModelCheckpoint;
use crate::pipeline::PreparedRecord;
use crate::synth::Finger;
use crate::{LabelVector, FINGERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerDirection {
    pub finger: Finger,
    pub auc: f64,
    pub se: f64,
    /// Fraction of windows whose output sign matches the label sign; an
    /// output of exactly 0 counts as wrong.
    pub accuracy: f64,
    pub flexion_windows: usize,
    pub extension_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub fingers: Vec<FingerDirection>,
}

impl DirectionReport {
    pub fn min_auc(&self) -> f64 {
        self.fingers.iter().map(|f| f.auc).fold(f64::INFINITY, f64::min)
    }

    pub fn min_accuracy(&self) -> f64 {
        self.fingers.iter().map(|f| f.accuracy).fold(f64::INFINITY, f64::min)
    }
}

/// Scores each finger column of `outputs` against the label signs.
pub fn direction_report_from_outputs(
    outputs: &[LabelVector],
    labels: &[LabelVector],
) -> Result<DirectionReport, EvalError> {
    if outputs.len() != labels.len() {
        return Err(EvalError::LengthMismatch(outputs.len(), labels.len()));
    }
    let fingers = Finger::ALL
        .iter()
        .map(|&finger| {
            let j = finger.index();
            let scores: Vec<f64> = outputs.iter().map(|o| o[j]).collect();
            let truth: Vec<bool> = labels.iter().map(|l| l[j] > 0.0).collect();
            let (auc, se) = auc_with_se(&scores, &truth).map_err(|e| match e {
                EvalError::SingleClass { .. } => EvalError::DegenerateFinger(j),
                e => e,
            })?;
            let correct = scores
                .iter()
                .zip(labels)
                .filter(|(s, l)| **s != 0.0 && l[j] != 0.0 && s.signum() == l[j].signum())
                .count();
            let flexion_windows = truth.iter().filter(|&&t| t).count();
            Ok(FingerDirection {
                finger,
                auc,
                se,
                accuracy: correct as f64 / scores.len() as f64,
                flexion_windows,
                extension_windows: truth.len() - flexion_windows,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(DirectionReport { fingers })
}

/// Model outputs and labels of every window of the held-out records.
pub fn direction_outputs(ckpt: &ModelCheckpoint, test: &[&PreparedRecord]) -> (Vec<LabelVector>, Vec<LabelVector>) {
    let mut outputs = Vec::new();
    let mut labels = Vec::new();
    for rec in test {
        for w in &rec.features {
            outputs.push(ckpt.predict(w));
            labels.push(rec.labels);
        }
    }
    (outputs, labels)
}

/// Evaluates `ckpt` on every window of the held-out records.
pub fn direction_report(ckpt: &ModelCheckpoint, test: &[&PreparedRecord]) -> Result<DirectionReport, EvalError> {
    let (outputs, labels) = direction_outputs(ckpt, test);
    direction_report_from_outputs(&outputs, &labels)
}

/// Per-finger mean and minimum over subjects for one model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    pub subjects: usize,
    pub mean_auc: [f64; FINGERS],
    pub mean_se: [f64; FINGERS],
    pub mean_accuracy: [f64; FINGERS],
    pub min_auc: f64,
    pub min_accuracy: f64,
}

impl DirectionSummary {
    pub fn from_reports(reports: &[DirectionReport]) -> Self {
        let n = reports.len().max(1) as f64;
        let mut s = Self {
            subjects: reports.len(),
            mean_auc: [0.0; FINGERS],
            mean_se: [0.0; FINGERS],
            mean_accuracy: [0.0; FINGERS],
            min_auc: f64::INFINITY,
            min_accuracy: f64::INFINITY,
        };
        for r in reports {
            for (j, f) in r.fingers.iter().enumerate() {
                s.mean_auc[j] += f.auc / n;
                s.mean_se[j] += f.se / n;
                s.mean_accuracy[j] += f.accuracy / n;
            }
            s.min_auc = s.min_auc.min(r.min_auc());
            s.min_accuracy = s.min_accuracy.min(r.min_accuracy());
        }
        s
    }
}
