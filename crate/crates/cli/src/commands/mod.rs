mod analyze;
mod live;
mod synth;
mod train;

pub use analyze::{eval, report, sweep};
pub use live::{serve, track};
pub use synth::{dsp, synth};
pub use train::train;

use std::path::{Path, PathBuf};

use twopoint::models::ModelKind;
use twopoint::synth::Finger;

use crate::error::{CliError, Result};

fn required(value: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(ModelKind::ALL.to_vec());
    }
    s.split(',')
        .map(|m| m.trim().parse().map_err(|e: twopoint::models::ModelError| CliError::Usage(e.to_string())))
        .collect()
}

/// "all" (or empty) selects every subject.
fn parse_subjects(s: &str) -> Result<Vec<usize>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|k| k.trim().parse().map_err(|_| CliError::Usage(format!("bad subject {k:?}"))))
        .collect()
}

fn parse_finger(s: &str) -> Result<Finger> {
    s.parse().map_err(|e: twopoint::synth::SynthError| CliError::Usage(e.to_string()))
}

/// Path for the resolved config next to a file output: `m.ckpt` gets
/// `m.run.toml`.
fn run_file_beside(file: &Path) -> PathBuf {
    file.with_extension("run.toml")
}
