use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::seed::{self, tag};

/// Record-level partition. `train_val` keeps the shuffled order (folds
/// are contiguous runs of it); `test` is sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `n` record indices; the first ceil(n/3) become the
/// test set.
pub fn split_dataset(n: usize, seed: u64) -> Result<Split, ModelError> {
    if n < 3 {
        return Err(ModelError::TooFewRecords { need: 3, got: n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(seed, &[tag::SPLIT]));
    let n_test = n.div_ceil(3);
    let mut test = idx[..n_test].to_vec();
    test.sort_unstable();
    Ok(Split {
        train_val: idx[n_test..].to_vec(),
        test,
    })
}
