use serde::{Deserialize, Serialize};

use crate::dsp::{DcRemoval, FilterChain};
use crate::features::feature_matrix_from_channels;
use crate::models::ModelCheckpoint;
use crate::{LabelVector, CHANNELS, SAMPLE_RATE, WINDOW_HOP, WINDOW_LEN};

use super::RuntimeError;

/// Decoded labels are clamped to ±1.5 before display and control.
pub const LABEL_CLAMP: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeTick {
    /// Tick number since the decoder started (0 = first full window).
    pub index: u64,
    /// Stream time at the end of the window, seconds.
    pub t: f64,
    /// Offset of the window's first sample in the stream.
    pub start_index: u64,
    pub labels: LabelVector,
}

/// Per-sample filtering into a 200-sample ring per channel, with a decode
/// every 50 samples once the ring is full.
#[derive(Debug, Clone)]
pub struct StreamDecoder {
    chain: FilterChain,
    ckpt: ModelCheckpoint,
    ring: Vec<[f64; WINDOW_LEN]>,
    head: usize,
    samples: u64,
    ticks: u64,
    faults: u64,
    filtered: [f64; CHANNELS],
    window: Vec<Vec<f64>>,
}

impl StreamDecoder {
    /// Decoder with the causal 0.5 Hz DC stage.
    pub fn new(ckpt: ModelCheckpoint) -> Self {
        Self::with_dc(ckpt, DcRemoval::streaming()).expect("high-pass DC stage streams")
    }

    pub fn with_dc(ckpt: ModelCheckpoint, dc: DcRemoval) -> Result<Self, RuntimeError> {
        if !matches!(dc, DcRemoval::HighPass { .. }) {
            return Err(crate::dsp::DspError::StreamingRequiresHighPass.into());
        }
        Ok(Self {
            chain: FilterChain::new(CHANNELS, dc),
            ckpt,
            ring: vec![[0.0; WINDOW_LEN]; CHANNELS],
            head: 0,
            samples: 0,
            ticks: 0,
            faults: 0,
            filtered: [0.0; CHANNELS],
            window: vec![vec![0.0; WINDOW_LEN]; CHANNELS],
        })
    }

    pub fn checkpoint(&self) -> &ModelCheckpoint {
        &self.ckpt
    }

    /// Swaps the model without touching filter state.
    pub fn set_model(&mut self, ckpt: ModelCheckpoint) {
        self.ckpt = ckpt;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Ticks dropped because the model produced a non-finite output.
    pub fn faults(&self) -> u64 {
        self.faults
    }

    /// Filters one frame; returns a tick when a hop boundary completes a
    /// full window.
    pub fn push_frame(&mut self, frame: &[f64; CHANNELS]) -> Result<Option<DecodeTick>, RuntimeError> {
        self.chain.push_frame(frame, &mut self.filtered)?;
        for (ring, &v) in self.ring.iter_mut().zip(&self.filtered) {
            ring[self.head] = v;
        }
        self.head = (self.head + 1) % WINDOW_LEN;
        self.samples += 1;
        let n = self.samples as usize;
        if n < WINDOW_LEN || (n - WINDOW_LEN) % WINDOW_HOP != 0 {
            return Ok(None);
        }
        let index = self.ticks;
        self.ticks += 1;
        // oldest sample sits at `head`
        for (dst, ring) in self.window.iter_mut().zip(&self.ring) {
            let (newer, older) = ring.split_at(self.head);
            dst[..older.len()].copy_from_slice(older);
            dst[older.len()..].copy_from_slice(newer);
        }
        let features = feature_matrix_from_channels(&self.window)
            .expect("ring holds 12 full channels")
            .flatten();
        let raw = self.ckpt.predict(&features);
        if raw.iter().any(|v| !v.is_finite()) {
            self.faults += 1;
            return Ok(None);
        }
        Ok(Some(DecodeTick {
            index,
            t: n as f64 / SAMPLE_RATE,
            start_index: (n - WINDOW_LEN) as u64,
            labels: raw.map(|v| v.clamp(-LABEL_CLAMP, LABEL_CLAMP)),
        }))
    }

    pub fn reset(&mut self) {
        self.chain.reset();
        self.ring.iter_mut().for_each(|r| r.fill(0.0));
        self.head = 0;
        self.samples = 0;
        self.ticks = 0;
    }
}

/// Decodes a finite frame stream.
pub fn stream_decode<I>(frames: I, ckpt: &ModelCheckpoint) -> Result<Vec<DecodeTick>, RuntimeError>
where
    I: IntoIterator<Item = [f64; CHANNELS]>,
{
    let mut dec = StreamDecoder::new(ckpt.clone());
    let mut ticks = Vec::new();
    for f in frames {
        if let Some(t) = dec.push_frame(&f)? {
            ticks.push(t);
        }
    }
    Ok(ticks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn one_second_gives_seventeen_ticks() {
        let ckpt = ModelCheckpoint::init(ModelKind::Ln, 1);
        let ticks = stream_decode((0..1000).map(|i| [(i as f64 * 0.3).sin(); CHANNELS]), &ckpt).unwrap();
        assert_eq!(ticks.len(), 17);
        assert_eq!(ticks[0].start_index, 0);
        assert_eq!(ticks[16].start_index, 800);
        assert_eq!(ticks[16].t, 1.0);
    }

    #[test]
    fn zero_stream_decodes_to_zero_for_linear_models() {
        for kind in [ModelKind::Ln, ModelKind::Dd] {
            let ckpt = ModelCheckpoint::init(kind, 2);
            let ticks = stream_decode(std::iter::repeat_n([0.0; CHANNELS], 600), &ckpt).unwrap();
            assert!(ticks.iter().all(|t| t.labels == [0.0; 5]));
        }
    }

    #[test]
    fn labels_are_clamped() {
        let mut ckpt = ModelCheckpoint::init(ModelKind::Ln, 3);
        for v in &mut ckpt.param_mut("w3").unwrap().data {
            *v *= 1e6;
        }
        let ticks = stream_decode((0..400).map(|i| [(i as f64).sin() * 100.0; CHANNELS]), &ckpt).unwrap();
        assert!(ticks
            .iter()
            .flat_map(|t| t.labels)
            .all(|v| v.abs() <= LABEL_CLAMP));
    }

    #[test]
    fn non_finite_output_is_a_fault() {
        let mut ckpt = ModelCheckpoint::init(ModelKind::Ln, 3);
        ckpt.param_mut("w3").unwrap().data[0] = f64::INFINITY;
        let mut dec = StreamDecoder::new(ckpt);
        let mut ticks = 0;
        for i in 0..400 {
            ticks += usize::from(dec.push_frame(&[(i as f64).sin(); CHANNELS]).unwrap().is_some());
        }
        assert_eq!(ticks, 0);
        assert_eq!(dec.faults(), 5);
    }

    #[test]
    fn record_mean_cannot_stream() {
        let ckpt = ModelCheckpoint::init(ModelKind::Ln, 1);
        assert!(StreamDecoder::with_dc(ckpt, DcRemoval::RecordMean).is_err());
    }
}
