use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::checkpoint::{ModelCheckpoint, TrainingMeta};
use super::{forward_batch, init_params, loss_and_grad, ModelError, ModelKind, NormStats, Tensor};
use crate::seed::{self, tag};
use crate::{LabelVector, FINGERS, INPUT_DIM};

/// All windows of one record plus the record's label.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordFeatures {
    pub windows: Vec<[f64; INPUT_DIM]>,
    pub labels: LabelVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub lr: f64,
    pub epochs: usize,
    pub folds: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            lr: 0.002,
            epochs: 15,
            folds: 10,
            batch_size: 64,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub kind: ModelKind,
    pub fold_val_mse: Vec<f64>,
    pub mean_val_mse: f64,
    pub final_train_mse: f64,
    pub epochs: usize,
    pub train_windows: usize,
}

/// Rows flattened into contiguous `n x 96` / `n x 5` buffers.
struct Rows {
    x: Vec<f64>,
    y: Vec<f64>,
    raw: Vec<[f64; INPUT_DIM]>,
}

impl Rows {
    fn gather<'a>(records: impl Iterator<Item = &'a RecordFeatures>) -> Self {
        let mut raw = Vec::new();
        let mut y = Vec::new();
        for r in records {
            for w in &r.windows {
                raw.push(*w);
                y.extend_from_slice(&r.labels);
            }
        }
        Self {
            x: Vec::new(),
            y,
            raw,
        }
    }

    fn normalize(&mut self, norm: &NormStats) {
        self.x = vec![0.0; self.raw.len() * INPUT_DIM];
        for (w, out) in self.raw.iter().zip(self.x.chunks_exact_mut(INPUT_DIM)) {
            norm.apply_into(w, out);
        }
    }

    fn len(&self) -> usize {
        self.raw.len()
    }
}

fn evaluate_mse(kind: ModelKind, params: &[Tensor], rows: &Rows) -> Result<f64, ModelError> {
    const CHUNK: usize = 256;
    let mut sum = 0.0;
    for start in (0..rows.len()).step_by(CHUNK) {
        let b = CHUNK.min(rows.len() - start);
        let out = forward_batch(kind, params, &rows.x[start * INPUT_DIM..][..b * INPUT_DIM], b)?;
        for (o, t) in out.iter().zip(&rows.y[start * FINGERS..][..b * FINGERS]) {
            sum += (o - t) * (o - t);
        }
    }
    Ok(sum / (rows.len() * FINGERS) as f64)
}

/// Adam on shuffled mini-batches. `run` selects independent init and
/// shuffle streams (fold index, or `folds` for the final fit).
fn fit(kind: ModelKind, rows: &Rows, hyper: &Hyper, run: usize) -> Result<Vec<Tensor>, ModelError> {
    let mut params = init_params(kind, &mut seed::rng(hyper.seed, &[tag::INIT, run as u64]));
    let mut adam = AdamState::new(&params);
    let mut shuffle_rng = seed::rng(hyper.seed, &[tag::SHUFFLE, run as u64]);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut bx = Vec::with_capacity(hyper.batch_size * INPUT_DIM);
    let mut by = Vec::with_capacity(hyper.batch_size * FINGERS);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(hyper.batch_size) {
            bx.clear();
            by.clear();
            for &i in batch {
                bx.extend_from_slice(&rows.x[i * INPUT_DIM..][..INPUT_DIM]);
                by.extend_from_slice(&rows.y[i * FINGERS..][..FINGERS]);
            }
            let (loss, grads) = loss_and_grad(kind, &params, &bx, &by, batch.len())?;
            let diverged = ModelError::Diverged { fold: run, epoch };
            if !loss.is_finite() {
                return Err(diverged);
            }
            match adam_step(&mut params, &grads, &mut adam, hyper.lr) {
                Err(ModelError::NonFiniteGradient) => return Err(diverged),
                r => r?,
            }
        }
    }
    Ok(params)
}

/// K-fold cross-validation over records followed by a full retrain.
///
/// `records` is the train+validation partition in fold order: fold `f`
/// validates on the `f`-th contiguous run of records. Normalization is fit
/// on each run's training rows only.
pub fn train(
    records: &[RecordFeatures],
    kind: ModelKind,
    hyper: &Hyper,
) -> Result<(ModelCheckpoint, TrainReport), ModelError> {
    let folds = hyper.folds.max(2);
    if records.len() < folds {
        return Err(ModelError::TooFewRecords {
            need: folds,
            got: records.len(),
        });
    }
    if let Some(i) = records.iter().position(|r| r.windows.is_empty()) {
        return Err(ModelError::EmptyRecord(i));
    }
    let n = records.len();
    let mut fold_val_mse = Vec::with_capacity(folds);
    for f in 0..folds {
        let (lo, hi) = (f * n / folds, (f + 1) * n / folds);
        let mut train_rows = Rows::gather(records[..lo].iter().chain(&records[hi..]));
        let mut val_rows = Rows::gather(records[lo..hi].iter());
        let norm = NormStats::fit(&train_rows.raw);
        train_rows.normalize(&norm);
        val_rows.normalize(&norm);
        let params = fit(kind, &train_rows, hyper, f)?;
        fold_val_mse.push(evaluate_mse(kind, &params, &val_rows)?);
    }

    let mut all = Rows::gather(records.iter());
    let norm = NormStats::fit(&all.raw);
    all.normalize(&norm);
    let params = fit(kind, &all, hyper, folds)?;
    let final_train_mse = evaluate_mse(kind, &params, &all)?;
    if !final_train_mse.is_finite() {
        return Err(ModelError::Diverged {
            fold: folds,
            epoch: hyper.epochs,
        });
    }

    let meta = TrainingMeta {
        seed: hyper.seed,
        epochs: hyper.epochs,
        lr: hyper.lr,
        batch_size: hyper.batch_size,
        folds,
        fold_losses: fold_val_mse.clone(),
        final_train_mse: Some(final_train_mse),
        train_windows: all.len(),
        subject: None,
        data: None,
    };
    let report = TrainReport {
        kind,
        mean_val_mse: fold_val_mse.iter().sum::<f64>() / folds as f64,
        fold_val_mse,
        final_train_mse,
        epochs: hyper.epochs,
        train_windows: all.len(),
    };
    Ok((ModelCheckpoint::from_parts(kind, params, norm, meta)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Records whose features are a fixed linear image of the labels.
    fn linear_records(n: usize) -> Vec<RecordFeatures> {
        let mut rng = seed::rng(3, &[]);
        let a: Vec<f64> = (0..INPUT_DIM * FINGERS).map(|_| rng.random_range(0.0..1.0)).collect();
        (0..n)
            .map(|r| {
                let labels: LabelVector =
                    std::array::from_fn(|j| if (r >> j) & 1 == 1 { 1.0 } else { -1.0 });
                let windows = (0..20)
                    .map(|_| {
                        std::array::from_fn(|i| {
                            let clean: f64 = (0..FINGERS).map(|j| a[i * FINGERS + j] * labels[j]).sum();
                            clean + rng.random_range(-0.01..0.01)
                        })
                    })
                    .collect();
                RecordFeatures { windows, labels }
            })
            .collect()
    }

    #[test]
    fn ln_fits_a_realizable_linear_map() {
        let records = linear_records(20);
        let hyper = Hyper {
            epochs: 40,
            ..Hyper::default()
        };
        let (ckpt, report) = train(&records, ModelKind::Ln, &hyper).unwrap();
        assert_eq!(report.fold_val_mse.len(), 10);
        assert!(report.final_train_mse <= 1e-2, "{}", report.final_train_mse);
        assert!(ckpt.kind.dims().len() == 4);
    }

    #[test]
    fn training_is_deterministic() {
        let records = linear_records(10);
        let hyper = Hyper {
            epochs: 2,
            ..Hyper::default()
        };
        let (a, ra) = train(&records, ModelKind::Mlp, &hyper).unwrap();
        let (b, rb) = train(&records, ModelKind::Mlp, &hyper).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(ra, rb);
    }

    #[test]
    fn divergence_is_reported() {
        let mut records = linear_records(10);
        records[0].windows[0][0] = 1e300;
        records[1].windows[0][0] = -1e300;
        let hyper = Hyper {
            epochs: 1,
            lr: 1e300,
            ..Hyper::default()
        };
        assert!(matches!(
            train(&records, ModelKind::Ln, &hyper),
            Err(ModelError::Diverged { .. })
        ));
    }

    #[test]
    fn too_few_records() {
        assert!(matches!(
            train(&linear_records(4), ModelKind::Ln, &Hyper::default()),
            Err(ModelError::TooFewRecords { need: 10, got: 4 })
        ));
    }
}
