use serde::{Deserialize, Serialize};

use super::EvalError;

/// MAPE only averages samples whose target magnitude reaches this value,
/// keeping sine zero crossings from dominating.
pub const MAPE_GUARD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub rmse: f64,
    /// `None` when no sample passes the guard.
    pub mape: Option<f64>,
    /// `None` for a constant target.
    pub r2: Option<f64>,
    pub samples: usize,
    pub mape_samples: usize,
    pub mape_guard: f64,
}

pub fn tracking_metrics(target: &[f64], decoded: &[f64]) -> Result<TrackingMetrics, EvalError> {
    if target.len() != decoded.len() {
        return Err(EvalError::LengthMismatch(target.len(), decoded.len()));
    }
    if target.len() < 2 {
        return Err(EvalError::TooFewPoints { need: 2, got: target.len() });
    }
    if target.iter().chain(decoded).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let (mut ss_res, mut ss_tot, mut ape, mut ape_n) = (0.0, 0.0, 0.0, 0usize);
    for (t, d) in target.iter().zip(decoded) {
        let e = d - t;
        ss_res += e * e;
        ss_tot += (t - mean) * (t - mean);
        if t.abs() >= MAPE_GUARD {
            ape += (e / t).abs();
            ape_n += 1;
        }
    }
    Ok(TrackingMetrics {
        rmse: (ss_res / n).sqrt(),
        mape: (ape_n > 0).then(|| ape / ape_n as f64),
        r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        samples: target.len(),
        mape_samples: ape_n,
        mape_guard: MAPE_GUARD,
    })
}
