use super::EvalError;

/// Twice the Mann-Whitney U statistic (ties count one half, so doubling
/// keeps it an integer), with the class sizes.
pub fn auc_pair_count(scores: &[f64], truth: &[bool]) -> Result<(u128, u64, u64), EvalError> {
    if scores.len() != truth.len() {
        return Err(EvalError::LengthMismatch(scores.len(), truth.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass { positives, negatives });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut two_u: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut n) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if truth[order[j]] {
                p += 1;
            } else {
                n += 1;
            }
            j += 1;
        }
        two_u += p * (2 * neg_below + n);
        neg_below += n;
        i = j;
    }
    Ok((two_u, positives as u64, negatives as u64))
}

/// Mann-Whitney AUC with its Hanley-McNeil standard error.
pub fn auc_with_se(scores: &[f64], truth: &[bool]) -> Result<(f64, f64), EvalError> {
    let (two_u, np, nn) = auc_pair_count(scores, truth)?;
    let (np, nn) = (np as f64, nn as f64);
    let a = two_u as f64 / (2.0 * np * nn);
    let q1 = a / (2.0 - a);
    let q2 = 2.0 * a * a / (1.0 + a);
    let var = (a * (1.0 - a) + (np - 1.0) * (q1 - a * a) + (nn - 1.0) * (q2 - a * a)) / (np * nn);
    Ok((a, var.max(0.0).sqrt()))
}
