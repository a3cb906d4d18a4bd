use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use twopoint::models::{split_dataset, ModelCheckpoint};
use twopoint::pipeline::{prepare_all, PreparedRecord};
use twopoint::synth::io::Dataset;
use twopoint::synth::SignalGenerator;

use crate::error::{CliError, Result};

pub const CKPT_EXT: &str = "ckpt";

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(CliError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let format = |e: csv::Error| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(format)?;
    for r in rows {
        w.serialize(r).map_err(format)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// `<model>_s<KK>` stem shared by every per-subject output.
pub fn stem(model: twopoint::models::ModelKind, subject: usize) -> String {
    format!("{}_s{subject:02}", model.name().to_ascii_lowercase())
}

/// Expands directories to the checkpoint files inside them, sorted.
pub fn collect_checkpoints(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(CliError::io(p))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == CKPT_EXT))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no checkpoints given (--ckpt FILE|DIR)".into()));
    }
    Ok(out)
}

pub fn open_dataset(dir: &Path) -> Result<Dataset> {
    Dataset::open(dir).map_err(CliError::at(dir))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint> {
    ModelCheckpoint::load(path).map_err(CliError::at(path))
}

/// A dataset with per-subject prepared records loaded on demand.
pub struct SubjectData {
    pub dataset: Dataset,
    cache: BTreeMap<usize, Vec<PreparedRecord>>,
}

impl SubjectData {
    pub fn open(dir: &Path) -> Result<Self> {
        Ok(Self {
            dataset: open_dataset(dir)?,
            cache: BTreeMap::new(),
        })
    }

    pub fn subjects(&self) -> usize {
        self.dataset.subjects()
    }

    pub fn prepared(&mut self, subject: usize) -> Result<&[PreparedRecord]> {
        if subject >= self.subjects() {
            return Err(CliError::Usage(format!(
                "subject {subject} out of range (dataset has {})",
                self.subjects()
            )));
        }
        if !self.cache.contains_key(&subject) {
            let records = prepare_all(&self.dataset.subject_records(subject)?)?;
            self.cache.insert(subject, records);
        }
        Ok(&self.cache[&subject])
    }

    /// The held-out records of `ckpt`'s subject under its training seed.
    pub fn test_records(&mut self, ckpt: &ModelCheckpoint, subject: usize) -> Result<Vec<&PreparedRecord>> {
        let seed = ckpt.meta.seed;
        let records = self.prepared(subject)?;
        let split = split_dataset(records.len(), seed)?;
        Ok(split.test.iter().map(|&i| &records[i]).collect())
    }

    pub fn generator(&self, subject: usize) -> SignalGenerator {
        self.dataset.manifest.cohort.config.subject_generator(subject)
    }
}

/// Subject of a checkpoint, from its metadata unless given explicitly.
pub fn checkpoint_subject(path: &Path, ckpt: &ModelCheckpoint) -> Result<usize> {
    ckpt.meta.subject.ok_or_else(|| CliError::Format {
        path: path.to_path_buf(),
        message: "checkpoint does not record its subject".into(),
    })
}

/// Dataset named by the flag, else the one recorded in the checkpoint.
pub fn data_dir(flag: Option<&Path>, ckpt: &ModelCheckpoint) -> Result<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| ckpt.meta.data.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("no dataset: pass --data DIR".into()))
}
