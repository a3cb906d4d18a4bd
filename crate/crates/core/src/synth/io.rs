//! On-disk dataset layout:
//!
//! ```text
//! DIR/manifest.json        cohort config, gesture table, record index
//! DIR/records/*.f32        one file per record, little-endian f32,
//!                          channel-major (all of channel 0, then 1, ...)
//! ```

use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::cohort::{CohortConfig, CohortManifest};
use super::generator::{MultiChannelSignal, RecordMeta};
use super::{FingerLabels, SynthError};
use crate::CHANNELS;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORD_DIR: &str = "records";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub file: String,
    pub subject: usize,
    pub gesture: u8,
    pub repetition: usize,
    pub seed: u64,
    pub samples: usize,
    pub labels: FingerLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(flatten)]
    pub cohort: CohortManifest,
    pub records: Vec<RecordEntry>,
}

impl DatasetManifest {
    pub fn subject_entries(&self, subject: usize) -> impl Iterator<Item = &RecordEntry> {
        self.records.iter().filter(move |r| r.subject == subject)
    }
}

fn record_file_name(meta: &RecordMeta) -> String {
    format!(
        "s{:02}_r{}_g{:02}.f32",
        meta.subject, meta.repetition, meta.gesture
    )
}

pub fn write_record(path: &Path, signal: &MultiChannelSignal) -> Result<(), SynthError> {
    let mut w = BufWriter::new(File::create(path)?);
    for ch in &signal.channels {
        for &v in ch {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_record(path: &Path, meta: RecordMeta, samples: usize) -> Result<MultiChannelSignal, SynthError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let expected = samples * CHANNELS * 4;
    if bytes.len() != expected {
        return Err(SynthError::BadRecord {
            path: path.display().to_string(),
            reason: format!("{} bytes, expected {expected}", bytes.len()),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    Ok(MultiChannelSignal {
        channels: values.chunks(samples).map(<[f64]>::to_vec).collect(),
        sample_rate: crate::SAMPLE_RATE,
        meta,
    })
}

/// Generates the cohort record by record and writes it under `dir`.
pub fn write_dataset(dir: &Path, config: &CohortConfig) -> Result<DatasetManifest, SynthError> {
    config.validate()?;
    let records_dir = dir.join(RECORD_DIR);
    fs::create_dir_all(&records_dir)?;
    let mut entries = Vec::new();
    for s in 0..config.subjects {
        let subject = config.subject(s);
        for rep in 0..config.reps {
            for g in super::gesture_table() {
                let (sig, labels) = subject.record(&g, rep)?;
                let file = format!("{RECORD_DIR}/{}", record_file_name(&sig.meta));
                write_record(&dir.join(&file), &sig)?;
                entries.push(RecordEntry {
                    file,
                    subject: s,
                    gesture: sig.meta.gesture,
                    repetition: rep,
                    seed: sig.meta.seed,
                    samples: sig.len(),
                    labels,
                });
            }
        }
    }
    let manifest = DatasetManifest {
        cohort: config.manifest(),
        records: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

/// A dataset directory opened for reading.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self, SynthError> {
        let text = fs::read_to_string(root.join(MANIFEST_FILE))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: serde_json::from_str(&text)?,
        })
    }

    pub fn subjects(&self) -> usize {
        self.manifest.cohort.config.subjects
    }

    pub fn subject_records(
        &self,
        subject: usize,
    ) -> Result<Vec<(MultiChannelSignal, FingerLabels)>, SynthError> {
        self.manifest
            .subject_entries(subject)
            .map(|e| {
                let meta = RecordMeta {
                    subject: e.subject,
                    gesture: e.gesture,
                    repetition: e.repetition,
                    seed: e.seed,
                };
                Ok((read_record(&self.root.join(&e.file), meta, e.samples)?, e.labels))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = CohortConfig {
            subjects: 2,
            reps: 1,
            duration_s: 0.25,
            ..CohortConfig::default()
        };
        let written = write_dataset(dir.path(), &cfg).unwrap();
        assert_eq!(written.records.len(), 20);
        let ds = Dataset::open(dir.path()).unwrap();
        assert_eq!(ds.manifest, written);
        let recs = ds.subject_records(1).unwrap();
        let direct = cfg.subject(1).records().unwrap();
        assert_eq!(recs.len(), 10);
        for ((a, la), (b, lb)) in recs.iter().zip(&direct) {
            assert_eq!(la, lb);
            assert_eq!(a.meta, b.meta);
            for (ca, cb) in a.channels.iter().zip(&b.channels) {
                for (x, y) in ca.iter().zip(cb) {
                    assert_eq!(*x, f64::from(*y as f32));
                }
            }
        }
    }

    #[test]
    fn record_layout_is_channel_major_le_f32() {
        let dir = tempfile::tempdir().unwrap();
        let sig = MultiChannelSignal {
            channels: (0..CHANNELS).map(|c| vec![c as f64, c as f64 + 0.5]).collect(),
            sample_rate: 1000.0,
            meta: RecordMeta::default(),
        };
        let path = dir.path().join("r.f32");
        write_record(&path, &sig).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), CHANNELS * 2 * 4);
        assert_eq!(&bytes[8..12], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[12..16], &1.5f32.to_le_bytes());
        assert!(read_record(&path, RecordMeta::default(), 3).is_err());
    }
}
