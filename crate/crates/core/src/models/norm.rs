use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::INPUT_DIM;

/// Smallest allowed per-dimension scale.
pub const NORM_FLOOR: f64 = 1e-12;

/// Per-dimension max-abs scaling, `x ↦ x / scale`. Fixes the origin and
/// keeps positive homogeneity, so scaled sEMG maps proportionally through
/// the linear models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub scale: Vec<f64>,
}

impl NormStats {
    pub fn identity() -> Self {
        Self {
            scale: vec![1.0; INPUT_DIM],
        }
    }

    /// Max-abs of each dimension over `rows`, floored at `NORM_FLOOR`.
    pub fn fit<'a, I>(rows: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64; INPUT_DIM]>,
    {
        let mut scale = vec![NORM_FLOOR; INPUT_DIM];
        for row in rows {
            for (s, v) in scale.iter_mut().zip(row) {
                *s = s.max(v.abs());
            }
        }
        Self { scale }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.scale.len() != INPUT_DIM {
            return Err(ModelError::DimensionMismatch {
                expected: INPUT_DIM,
                got: self.scale.len(),
            });
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s >= NORM_FLOOR)) {
            return Err(ModelError::InvalidCheckpoint(
                "normalization scale must be finite and >= 1e-12".into(),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        let mut out = [0.0; INPUT_DIM];
        for ((o, v), s) in out.iter_mut().zip(x).zip(&self.scale) {
            *o = v / s;
        }
        out
    }

    pub(crate) fn apply_into(&self, x: &[f64; INPUT_DIM], out: &mut [f64]) {
        for ((o, v), s) in out.iter_mut().zip(x).zip(&self.scale) {
            *o = v / s;
        }
    }
}
