use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitThresholds {
    pub rho_min: f64,
    pub r2_min: f64,
}

impl Default for FitThresholds {
    fn default() -> Self {
        Self {
            rho_min: 0.99,
            r2_min: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitVerdict {
    /// Spearman correlation of output against scale; `None` when either
    /// side is constant.
    pub rho: Option<f64>,
    /// R² of the least-squares line; `None` for a constant curve.
    pub r2: Option<f64>,
    pub monotone: bool,
    pub linear: bool,
    pub pass: bool,
    pub thresholds: FitThresholds,
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = mean;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&ranks(x), &ranks(y))
}

fn r_squared(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    Some(1.0 - ss_res / syy)
}

/// Monotone (Spearman ρ ≥ ρ_min) and linear (R² ≥ r2_min) test of a sweep
/// curve. Point order does not matter.
pub fn fit_verdict(grid: &[f64], values: &[f64], thresholds: FitThresholds) -> Result<FitVerdict, EvalError> {
    if grid.len() != values.len() {
        return Err(EvalError::LengthMismatch(grid.len(), values.len()));
    }
    if grid.len() < 5 {
        return Err(EvalError::TooFewPoints { need: 5, got: grid.len() });
    }
    if grid.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let mut pts: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let rho = spearman(&x, &y);
    let r2 = r_squared(&x, &y);
    let monotone = rho.is_some_and(|r| r >= thresholds.rho_min);
    let linear = r2.is_some_and(|r| r >= thresholds.r2_min);
    Ok(FitVerdict {
        rho,
        r2,
        monotone,
        linear,
        pass: monotone && linear,
        thresholds,
    })
}
