use thiserror::Error;

use crate::dsp::DspError;
use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::models::ModelError;
use crate::runtime::RuntimeError;
use crate::synth::SynthError;

/// Any failure of the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("synth: {0}")]
    Synth(#[from] SynthError),
    #[error("dsp: {0}")]
    Dsp(#[from] DspError),
    #[error("features: {0}")]
    Feature(#[from] FeatureError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("eval: {0}")]
    Eval(#[from] EvalError),
    #[error("runtime: {0}")]
    Runtime(#[from] RuntimeError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable one-word category for machine-readable error lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Synth(SynthError::Io(_)) | Error::Model(ModelError::Io(_)) | Error::Io(_) => "io",
            Error::Synth(_) => "synth",
            Error::Dsp(_) => "dsp",
            Error::Feature(_) => "features",
            Error::Model(ModelError::Diverged { .. }) => "diverged",
            Error::Model(_) => "model",
            Error::Eval(_) => "eval",
            Error::Runtime(_) => "runtime",
        }
    }
}
