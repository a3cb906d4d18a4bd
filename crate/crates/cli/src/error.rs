use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] twopoint::Error),
    /// A core failure while reading or writing `path`.
    #[error("{path}: {source}")]
    At {
        path: PathBuf,
        #[source]
        source: twopoint::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) | CliError::At { source: e, .. } => e.category(),
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn at<E: Into<twopoint::Error>>(path: impl Into<PathBuf>) -> impl FnOnce(E) -> CliError {
        let path = path.into();
        move |e| CliError::At {
            path,
            source: e.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

macro_rules! core_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

core_from!(
    twopoint::synth::SynthError,
    twopoint::models::ModelError,
    twopoint::eval::EvalError,
    twopoint::runtime::RuntimeError,
    twopoint::dsp::DspError
);

pub type Result<T, E = CliError> = std::result::Result<T, E>;
