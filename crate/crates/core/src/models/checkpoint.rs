use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use super::{forward_batch, init_params, validate_params, ModelError, ModelKind, NormStats, Tensor};
use crate::features::FeatureMatrix;
use crate::seed::{self, tag};
use crate::{LabelVector, FINGERS, INPUT_DIM};

/// Training provenance stored with the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub folds: usize,
    pub fold_losses: Vec<f64>,
    pub final_train_mse: Option<f64>,
    pub train_windows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
}

impl TrainingMeta {
    pub fn untrained(seed: u64) -> Self {
        Self {
            seed,
            epochs: 0,
            lr: 0.0,
            batch_size: 0,
            folds: 0,
            fold_losses: Vec::new(),
            final_train_mse: None,
            train_windows: 0,
            subject: None,
            data: None,
        }
    }
}

/// A trained (or freshly initialized) model with its normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub kind: ModelKind,
    pub dims: Vec<usize>,
    pub params: Vec<Tensor>,
    pub norm: NormStats,
    pub meta: TrainingMeta,
}

impl ModelCheckpoint {
    /// Seeded random weights with identity normalization.
    pub fn init(kind: ModelKind, seed: u64) -> Self {
        let mut rng = seed::rng(seed, &[tag::INIT]);
        Self {
            kind,
            dims: kind.dims(),
            params: init_params(kind, &mut rng),
            norm: NormStats::identity(),
            meta: TrainingMeta::untrained(seed),
        }
    }

    pub fn from_parts(
        kind: ModelKind,
        params: Vec<Tensor>,
        norm: NormStats,
        meta: TrainingMeta,
    ) -> Result<Self, ModelError> {
        let c = Self {
            kind,
            dims: kind.dims(),
            params,
            norm,
            meta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dims != self.kind.dims() {
            return Err(ModelError::InvalidCheckpoint(format!(
                "dims {:?} do not match {} layout {:?}",
                self.dims,
                self.kind,
                self.kind.dims()
            )));
        }
        validate_params(self.kind, &self.params)?;
        self.norm.validate()
    }

    pub fn param(&self, name: &str) -> Option<&Tensor> {
        self.params.iter().find(|t| t.name == name)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.params.iter_mut().find(|t| t.name == name)
    }

    /// Model output for an already-normalized input.
    pub fn forward(&self, x: &[f64; INPUT_DIM]) -> LabelVector {
        let y = forward_batch(self.kind, &self.params, x, 1).expect("input width is fixed");
        let mut out = [0.0; FINGERS];
        out.copy_from_slice(&y);
        out
    }

    /// Normalizes raw features and runs the model. Every decode path
    /// (offline evaluation, sweeps, streaming) goes through here one window
    /// at a time, so their outputs agree bit for bit.
    pub fn predict(&self, features: &[f64; INPUT_DIM]) -> LabelVector {
        self.forward(&self.norm.apply(features))
    }

    pub fn predict_matrix(&self, m: &FeatureMatrix) -> LabelVector {
        self.predict(&m.flatten())
    }

    fn expect_kind(&self, kind: ModelKind) -> Result<(), ModelError> {
        if self.kind != kind {
            return Err(ModelError::KindMismatch {
                expected: kind,
                got: self.kind,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn forward_as(kind: ModelKind, x: &[f64], ckpt: &ModelCheckpoint) -> Result<LabelVector, ModelError> {
    ckpt.expect_kind(kind)?;
    let x: &[f64; INPUT_DIM] = x.try_into().map_err(|_| ModelError::DimensionMismatch {
        expected: INPUT_DIM,
        got: x.len(),
    })?;
    Ok(ckpt.forward(x))
}

pub fn ln_forward(x: &[f64], ckpt: &ModelCheckpoint) -> Result<LabelVector, ModelError> {
    forward_as(ModelKind::Ln, x, ckpt)
}

pub fn dd_forward(x: &[f64], ckpt: &ModelCheckpoint) -> Result<LabelVector, ModelError> {
    forward_as(ModelKind::Dd, x, ckpt)
}

pub fn mlp_forward(x: &[f64], ckpt: &ModelCheckpoint) -> Result<LabelVector, ModelError> {
    forward_as(ModelKind::Mlp, x, ckpt)
}

/// `x` is the 12 x 8 feature image flattened channel-major.
pub fn cnn_forward(x: &[f64], ckpt: &ModelCheckpoint) -> Result<LabelVector, ModelError> {
    forward_as(ModelKind::Cnn, x, ckpt)
}
