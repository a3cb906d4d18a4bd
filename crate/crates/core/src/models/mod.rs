//! The four regressors (LN, one-layer DD, MLP, CNN) with hand-written
//! backpropagation, Adam, max-abs normalization and the training protocol.
//!
//! Every network maps a normalized 96-vector (12 channels x 8 features,
//! channel-major) to 5 finger labels. Weight matrices are stored row-major
//! as `out x in`; a batch is `batch x width`.

mod adam;
mod checkpoint;
mod cnn;
mod dd;
mod gemm;
mod ln;
mod mlp;
mod norm;
mod split;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{cnn_forward, dd_forward, ln_forward, mlp_forward, ModelCheckpoint, TrainingMeta};
pub use norm::{NormStats, NORM_FLOOR};
pub use split::{split_dataset, Split};
pub use train::{train, Hyper, RecordFeatures, TrainReport};

use crate::{FINGERS, INPUT_DIM};

/// Hidden width shared by LN, DD and MLP.
pub const HIDDEN: usize = 64;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("checkpoint is {got}, operation needs {expected}")]
    KindMismatch { expected: ModelKind, got: ModelKind },
    #[error("unknown model kind {0:?} (expected ln, dd, mlp or cnn)")]
    UnknownKind(String),
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("training diverged (non-finite loss) in fold {fold}, epoch {epoch}")]
    Diverged { fold: usize, epoch: usize },
    #[error("need at least {need} records, got {got}")]
    TooFewRecords { need: usize, got: usize },
    #[error("record {0} has no windows")]
    EmptyRecord(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    #[serde(alias = "ln")]
    Ln,
    #[serde(alias = "dd")]
    Dd,
    #[serde(alias = "mlp")]
    Mlp,
    #[serde(alias = "cnn")]
    Cnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Dd, ModelKind::Ln, ModelKind::Mlp, ModelKind::Cnn];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ln => "LN",
            ModelKind::Dd => "DD",
            ModelKind::Mlp => "MLP",
            ModelKind::Cnn => "CNN",
        }
    }

    /// LN and DD carry no biases and no activations.
    pub fn has_bias(self) -> bool {
        matches!(self, ModelKind::Mlp | ModelKind::Cnn)
    }

    /// Layer widths, input first. For the CNN the entries are the input
    /// width, the two conv channel counts, the flattened pool size and the
    /// two dense widths.
    pub fn dims(self) -> Vec<usize> {
        match self {
            ModelKind::Ln | ModelKind::Mlp => vec![INPUT_DIM, HIDDEN, HIDDEN, FINGERS],
            ModelKind::Dd => vec![INPUT_DIM, HIDDEN, FINGERS],
            ModelKind::Cnn => vec![INPUT_DIM, cnn::C1, cnn::C2, cnn::FLAT, cnn::FC, FINGERS],
        }
    }

    /// Parameter tensors in checkpoint order.
    pub fn param_specs(self) -> Vec<ParamSpec> {
        match self {
            ModelKind::Ln => ln::specs(),
            ModelKind::Dd => dd::specs(),
            ModelKind::Mlp => mlp::specs(),
            ModelKind::Cnn => cnn::specs(),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ln" => Ok(ModelKind::Ln),
            "dd" => Ok(ModelKind::Dd),
            "mlp" => Ok(ModelKind::Mlp),
            "cnn" => Ok(ModelKind::Cnn),
            _ => Err(ModelError::UnknownKind(s.to_string())),
        }
    }
}

/// Shape and initialization rule of one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub shape: Vec<usize>,
    /// Initialization draws uniformly from ±sqrt(1/fan_in), biases included.
    pub fan_in: usize,
    pub is_bias: bool,
}

impl ParamSpec {
    pub(crate) fn weight(name: &'static str, shape: &[usize], fan_in: usize) -> Self {
        Self {
            name,
            shape: shape.to_vec(),
            fan_in,
            is_bias: false,
        }
    }

    pub(crate) fn bias(name: &'static str, len: usize, fan_in: usize) -> Self {
        Self {
            name,
            shape: vec![len],
            fan_in,
            is_bias: true,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: &str, shape: &[usize]) -> Self {
        Self {
            name: name.to_string(),
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Fresh parameters for `kind`.
pub fn init_params<R: Rng>(kind: ModelKind, rng: &mut R) -> Vec<Tensor> {
    kind.param_specs()
        .into_iter()
        .map(|spec| {
            let mut t = Tensor::zeros(spec.name, &spec.shape);
            let bound = (1.0 / spec.fan_in as f64).sqrt();
            for v in &mut t.data {
                *v = rng.random_range(-bound..bound);
            }
            t
        })
        .collect()
}

/// Checks tensor names and shapes against the kind's layout.
pub fn validate_params(kind: ModelKind, params: &[Tensor]) -> Result<(), ModelError> {
    let specs = kind.param_specs();
    if specs.len() != params.len() {
        return Err(ModelError::InvalidCheckpoint(format!(
            "{kind} needs {} tensors, found {}",
            specs.len(),
            params.len()
        )));
    }
    for (spec, t) in specs.iter().zip(params) {
        if spec.name != t.name || spec.shape != t.shape || t.data.len() != spec.len() {
            return Err(ModelError::InvalidCheckpoint(format!(
                "tensor {} {:?} does not match {} {:?}",
                t.name, t.shape, spec.name, spec.shape
            )));
        }
        if t.data.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidCheckpoint(format!("tensor {} is not finite", t.name)));
        }
    }
    Ok(())
}

/// Batched forward pass on normalized inputs (`batch x 96`), returning
/// `batch x 5` outputs.
pub fn forward_batch(
    kind: ModelKind,
    params: &[Tensor],
    x: &[f64],
    batch: usize,
) -> Result<Vec<f64>, ModelError> {
    check_input(x, batch)?;
    Ok(match kind {
        ModelKind::Ln => ln::forward(params, x, batch).0,
        ModelKind::Dd => dd::forward(params, x, batch).0,
        ModelKind::Mlp => mlp::forward(params, x, batch).0,
        ModelKind::Cnn => cnn::forward(params, x, batch).0,
    })
}

/// Mean-squared-error loss over `batch x 5` targets and its gradient with
/// respect to every parameter tensor (same order as `params`).
pub fn loss_and_grad(
    kind: ModelKind,
    params: &[Tensor],
    x: &[f64],
    y: &[f64],
    batch: usize,
) -> Result<(f64, Vec<Vec<f64>>), ModelError> {
    check_input(x, batch)?;
    if y.len() != batch * FINGERS {
        return Err(ModelError::DimensionMismatch {
            expected: batch * FINGERS,
            got: y.len(),
        });
    }
    macro_rules! run {
        ($net:ident) => {{
            let (out, cache) = $net::forward(params, x, batch);
            let (loss, dy) = mse(&out, y);
            (loss, $net::backward(params, x, batch, &cache, &dy))
        }};
    }
    Ok(match kind {
        ModelKind::Ln => run!(ln),
        ModelKind::Dd => run!(dd),
        ModelKind::Mlp => run!(mlp),
        ModelKind::Cnn => run!(cnn),
    })
}

fn check_input(x: &[f64], batch: usize) -> Result<(), ModelError> {
    if x.len() != batch * INPUT_DIM {
        return Err(ModelError::DimensionMismatch {
            expected: batch * INPUT_DIM,
            got: x.len(),
        });
    }
    Ok(())
}

/// Loss averaged over every output element and its derivative.
pub(crate) fn mse(out: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let n = out.len() as f64;
    let mut loss = 0.0;
    let dy = out
        .iter()
        .zip(target)
        .map(|(o, t)| {
            let e = o - t;
            loss += e * e;
            2.0 * e / n
        })
        .collect();
    (loss / n, dy)
}
