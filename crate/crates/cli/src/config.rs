//! Run configuration. One TOML file holds every knob; each command reads
//! it (when `--config` is given), lets flags override, and writes the
//! fully resolved result beside its outputs as `run.toml`.
//!
//! ```toml
//! seed = 42
//!
//! [synth]
//! subjects = 20
//! reps = 3
//! duration_s = 30.0
//! noise_floor = 0.01
//! cross_talk = 0.3
//! jitter = 0.2
//! artifacts = "none"          # or a list such as "dc,mains,drift"
//!
//! [train]
//! models = ["DD", "LN", "MLP", "CNN"]
//! subjects = []               # empty means every subject in the dataset
//! lr = 0.002
//! epochs = 15
//! folds = 10
//! batch_size = 64
//! jobs = 1
//!
//! [sweep]
//! grid = "0.1:1.0:0.1"
//! rho_min = 0.99
//! r2_min = 0.95
//!
//! [track]
//! freq_hz = 0.1
//! duration_s = 60.0
//! finger = "index"
//! scope = "hand"              # scripted source moves the whole hand or one finger
//!
//! [serve]
//! bind = "127.0.0.1:8765"
//! k_alpha = 60.0
//! k_F = 10.0
//! realtime = true
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twopoint::eval::{FitThresholds, ScaleGrid};
use twopoint::models::{Hyper, ModelKind};
use twopoint::runtime::{Gains, ScriptScope, SessionConfig};
use twopoint::synth::{ArtifactFlags, CohortConfig, Finger};

use crate::error::{CliError, Result};

pub const RUN_FILE: &str = "run.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub command: String,
    pub paths: Paths,
    pub synth: SynthSection,
    pub train: TrainSection,
    pub sweep: SweepSection,
    pub track: TrackSection,
    pub serve: ServeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            command: String::new(),
            paths: Paths::default(),
            synth: SynthSection::default(),
            train: TrainSection::default(),
            sweep: SweepSection::default(),
            track: TrackSection::default(),
            serve: ServeSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ckpt: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ui: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub subjects: usize,
    pub reps: usize,
    pub duration_s: f64,
    pub noise_floor: f64,
    pub cross_talk: f64,
    pub jitter: f64,
    pub artifacts: String,
}

impl Default for SynthSection {
    fn default() -> Self {
        let c = CohortConfig::default();
        Self {
            subjects: c.subjects,
            reps: c.reps,
            duration_s: c.duration_s,
            noise_floor: c.noise_floor,
            cross_talk: c.cross_talk,
            jitter: c.jitter,
            artifacts: c.artifacts.to_string(),
        }
    }
}

impl SynthSection {
    pub fn cohort(&self, seed: u64) -> Result<CohortConfig> {
        let artifacts: ArtifactFlags = self.artifacts.parse().map_err(|e| CliError::Usage(format!("--artifacts: {e}")))?;
        Ok(CohortConfig {
            subjects: self.subjects,
            reps: self.reps,
            duration_s: self.duration_s,
            seed,
            noise_floor: self.noise_floor,
            cross_talk: self.cross_talk,
            jitter: self.jitter,
            artifacts,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub models: Vec<ModelKind>,
    pub subjects: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub folds: usize,
    pub batch_size: usize,
    pub jobs: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let h = Hyper::default();
        Self {
            models: ModelKind::ALL.to_vec(),
            subjects: Vec::new(),
            lr: h.lr,
            epochs: h.epochs,
            folds: h.folds,
            batch_size: h.batch_size,
            jobs: 1,
        }
    }
}

impl TrainSection {
    pub fn hyper(&self, seed: u64) -> Hyper {
        Hyper {
            lr: self.lr,
            epochs: self.epochs,
            folds: self.folds,
            batch_size: self.batch_size,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub grid: String,
    pub rho_min: f64,
    pub r2_min: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let t = FitThresholds::default();
        Self {
            grid: ScaleGrid::default().to_string(),
            rho_min: t.rho_min,
            r2_min: t.r2_min,
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Result<ScaleGrid> {
        self.grid.parse().map_err(|e| CliError::Usage(format!("--grid: {e}")))
    }

    pub fn thresholds(&self) -> FitThresholds {
        FitThresholds {
            rho_min: self.rho_min,
            r2_min: self.r2_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSection {
    pub freq_hz: f64,
    pub duration_s: f64,
    pub finger: Finger,
    pub scope: ScriptScope,
}

impl Default for TrackSection {
    fn default() -> Self {
        let s = SessionConfig::default();
        Self {
            freq_hz: s.freq_hz,
            duration_s: s.duration_s,
            finger: s.finger,
            scope: s.scope,
        }
    }
}

impl TrackSection {
    pub fn session(&self) -> SessionConfig {
        SessionConfig {
            freq_hz: self.freq_hz,
            duration_s: self.duration_s,
            finger: self.finger,
            scope: self.scope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeSection {
    pub bind: String,
    pub k_alpha: f64,
    #[serde(rename = "k_F")]
    pub k_f: f64,
    pub realtime: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl Default for ServeSection {
    fn default() -> Self {
        let g = Gains::default();
        Self {
            bind: "127.0.0.1:8765".into(),
            k_alpha: g.k_alpha,
            k_f: g.k_f,
            realtime: true,
            duration_s: None,
        }
    }
}

impl ServeSection {
    pub fn gains(&self) -> Result<Gains> {
        Ok(Gains::new(self.k_alpha, self.k_f)?)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    /// Writes the resolved config to `path`.
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()).map_err(CliError::io(path))
    }
}
