//! Glue from raw records to model inputs, and the per-subject protocol
//! (seeded record split, cross-validated training, held-out evaluation).

use crate::dsp::{window_starts, DspError, FilterChain};
use crate::features::{feature_matrix_from_channels, FeatureMatrix};
use crate::models::{split_dataset, train, Hyper, ModelCheckpoint, ModelKind, RecordFeatures, Split, TrainReport};
use crate::synth::{FingerLabels, MultiChannelSignal, RecordMeta};
use crate::{Error, LabelVector, CHANNELS, INPUT_DIM, WINDOW_LEN};

/// A record after the offline chain, with its window features.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedRecord {
    pub meta: RecordMeta,
    pub labels: LabelVector,
    /// Channel-major rectified signal.
    pub rectified: Vec<Vec<f64>>,
    pub features: Vec<[f64; INPUT_DIM]>,
}

impl PreparedRecord {
    pub fn record_features(&self) -> RecordFeatures {
        RecordFeatures {
            windows: self.features.clone(),
            labels: self.labels,
        }
    }
}

/// Offline preprocessing: record-mean DC removal, band-pass, notch,
/// rectification.
pub fn preprocess(signal: &MultiChannelSignal) -> Result<Vec<Vec<f64>>, Error> {
    if signal.sample_rate != crate::SAMPLE_RATE {
        return Err(DspError::UnsupportedSampleRate(signal.sample_rate).into());
    }
    Ok(FilterChain::offline(CHANNELS).apply_record(&signal.channels)?)
}

/// Features of every window of a rectified record, each window's samples
/// multiplied by `scale` first.
pub fn window_features(rectified: &[Vec<f64>], scale: f64) -> Result<Vec<[f64; INPUT_DIM]>, Error> {
    let n = rectified.first().map_or(0, Vec::len);
    if n < WINDOW_LEN {
        return Err(DspError::TooShort { len: n, need: WINDOW_LEN }.into());
    }
    let mut buf = vec![vec![0.0; WINDOW_LEN]; rectified.len()];
    window_starts(n)
        .map(|start| {
            for (b, ch) in buf.iter_mut().zip(rectified) {
                for (o, v) in b.iter_mut().zip(&ch[start..start + WINDOW_LEN]) {
                    *o = v * scale;
                }
            }
            Ok(feature_matrix_from_channels(&buf)?.flatten())
        })
        .collect()
}

/// Feature matrix of one rectified channel-major window.
pub fn window_matrix(window: &[Vec<f64>]) -> Result<FeatureMatrix, Error> {
    Ok(feature_matrix_from_channels(window)?)
}

pub fn prepare(signal: &MultiChannelSignal, labels: &FingerLabels) -> Result<PreparedRecord, Error> {
    let rectified = preprocess(signal)?;
    let features = window_features(&rectified, 1.0)?;
    Ok(PreparedRecord {
        meta: signal.meta,
        labels: *labels.values(),
        rectified,
        features,
    })
}

pub fn prepare_all(records: &[(MultiChannelSignal, FingerLabels)]) -> Result<Vec<PreparedRecord>, Error> {
    records.iter().map(|(s, l)| prepare(s, l)).collect()
}

/// One subject's trained model with its split.
#[derive(Debug, Clone)]
pub struct SubjectFit {
    pub split: Split,
    pub checkpoint: ModelCheckpoint,
    pub report: TrainReport,
}

impl SubjectFit {
    pub fn test_records<'a>(&self, records: &'a [PreparedRecord]) -> Vec<&'a PreparedRecord> {
        self.split.test.iter().map(|&i| &records[i]).collect()
    }
}

/// Splits one subject's records with `hyper.seed` and trains on the
/// train+validation part.
pub fn fit_subject(records: &[PreparedRecord], kind: ModelKind, hyper: &Hyper) -> Result<SubjectFit, Error> {
    let split = split_dataset(records.len(), hyper.seed)?;
    let train_val: Vec<RecordFeatures> = split
        .train_val
        .iter()
        .map(|&i| records[i].record_features())
        .collect();
    let (mut checkpoint, report) = train(&train_val, kind, hyper)?;
    checkpoint.meta.subject = records.first().map(|r| r.meta.subject);
    Ok(SubjectFit {
        split,
        checkpoint,
        report,
    })
}
