use serde::{Deserialize, Serialize};

use super::DspError;
use crate::synth::FingerLabels;
use crate::{WINDOW_HOP, WINDOW_LEN};

/// A 200 ms multi-channel slice of a preprocessed record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedSegment {
    /// Channel-major, `channels x WINDOW_LEN`.
    pub data: Vec<Vec<f64>>,
    /// Offset of the first sample in the source record.
    pub start_index: usize,
    pub label: Option<FingerLabels>,
}

impl WindowedSegment {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            data: self
                .data
                .iter()
                .map(|c| c.iter().map(|v| v * k).collect())
                .collect(),
            start_index: self.start_index,
            label: self.label,
        }
    }
}

/// Number of full windows in a record of `n` samples.
pub fn window_count(n: usize) -> Option<usize> {
    (n >= WINDOW_LEN).then(|| (n - WINDOW_LEN) / WINDOW_HOP + 1)
}

/// Start offsets of every full window.
pub fn window_starts(n: usize) -> impl Iterator<Item = usize> {
    (0..window_count(n).unwrap_or(0)).map(|m| m * WINDOW_HOP)
}

/// Cuts a channel-major record into 200-sample windows advancing by 50.
pub fn window(
    record: &[Vec<f64>],
    label: Option<FingerLabels>,
) -> Result<Vec<WindowedSegment>, DspError> {
    let n = record.first().map_or(0, Vec::len);
    if record.iter().any(|c| c.len() != n) {
        return Err(DspError::RaggedChannels);
    }
    if window_count(n).is_none() {
        return Err(DspError::TooShort {
            len: n,
            need: WINDOW_LEN,
        });
    }
    Ok(window_starts(n)
        .map(|start| WindowedSegment {
            data: record
                .iter()
                .map(|c| c[start..start + WINDOW_LEN].to_vec())
                .collect(),
            start_index: start,
            label,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_counts() {
        assert_eq!(window_count(1000), Some(17));
        assert_eq!(window_count(200), Some(1));
        assert_eq!(window_count(249), Some(1));
        assert_eq!(window_count(250), Some(2));
        assert_eq!(window_count(199), None);
    }

    #[test]
    fn windows_advance_by_hop() {
        let rec = vec![(0..1000).map(f64::from).collect::<Vec<_>>(); 2];
        let w = window(&rec, None).unwrap();
        assert_eq!(w.len(), 17);
        assert_eq!(w[3].start_index, 150);
        assert_eq!(w[3].data[1][0], 150.0);
        assert_eq!(w[16].data[0][199], 999.0);
    }

    #[test]
    fn short_record_is_an_error() {
        let rec = vec![vec![0.0; 199]; 12];
        assert!(matches!(
            window(&rec, None),
            Err(DspError::TooShort { len: 199, need: 200 })
        ));
    }
}
