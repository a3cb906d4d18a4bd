use serde::{Deserialize, Serialize};

use super::design::{butterworth_highpass, butterworth_lowpass, notch, Biquad};
use super::iir::Cascade;
use super::DspError;
use crate::SAMPLE_RATE;

pub const BAND_LOW_HZ: f64 = 10.0;
pub const BAND_HIGH_HZ: f64 = 450.0;
/// Order of each of the high-pass and low-pass halves; the composed
/// band-pass has order 6.
pub const BAND_HALF_ORDER: usize = 3;
pub const NOTCH_HZ: f64 = 50.0;
pub const NOTCH_WIDTH_HZ: f64 = 2.0;
pub const STREAMING_DC_CUTOFF_HZ: f64 = 0.5;

/// How the DC stage removes the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DcRemoval {
    /// Subtract the whole-record mean. Needs the full record up front.
    RecordMean,
    /// First-order Butterworth high-pass; usable sample by sample.
    HighPass { cutoff_hz: f64 },
}

impl DcRemoval {
    pub fn streaming() -> Self {
        DcRemoval::HighPass {
            cutoff_hz: STREAMING_DC_CUTOFF_HZ,
        }
    }
}

pub fn bandpass_sections(fs: f64) -> Vec<Biquad> {
    let mut s = butterworth_highpass(BAND_HALF_ORDER, BAND_LOW_HZ, fs);
    s.extend(butterworth_lowpass(BAND_HALF_ORDER, BAND_HIGH_HZ, fs));
    s
}

pub fn notch_section(fs: f64) -> Biquad {
    notch(NOTCH_HZ, NOTCH_WIDTH_HZ, fs)
}

#[derive(Debug, Clone)]
struct ChannelChain {
    dc: Option<Cascade>,
    band: Cascade,
    notch: Cascade,
}

impl ChannelChain {
    fn new(dc: DcRemoval) -> Self {
        let dc = match dc {
            DcRemoval::RecordMean => None,
            DcRemoval::HighPass { cutoff_hz } => {
                Some(Cascade::new(butterworth_highpass(1, cutoff_hz, SAMPLE_RATE)))
            }
        };
        Self {
            dc,
            band: Cascade::new(bandpass_sections(SAMPLE_RATE)),
            notch: Cascade::new(vec![notch_section(SAMPLE_RATE)]),
        }
    }

    /// Band-pass, notch and rectify one sample whose DC has already been
    /// handled.
    #[inline]
    fn tail(&mut self, x: f64) -> f64 {
        self.notch.process(self.band.process(x)).abs()
    }
}

/// The full preprocessing chain for a multi-channel record:
/// DC removal, band-pass (10-450 Hz, order 6), 50 Hz notch, full-wave
/// rectification. Every stage is causal and single-pass, so the streaming
/// form is bit-identical to whole-record application.
#[derive(Debug, Clone)]
pub struct FilterChain {
    dc: DcRemoval,
    channels: Vec<ChannelChain>,
}

impl FilterChain {
    pub fn new(n_channels: usize, dc: DcRemoval) -> Self {
        Self {
            dc,
            channels: (0..n_channels).map(|_| ChannelChain::new(dc)).collect(),
        }
    }

    /// Chain with exact mean subtraction, for stored records.
    pub fn offline(n_channels: usize) -> Self {
        Self::new(n_channels, DcRemoval::RecordMean)
    }

    /// Chain with the 0.5 Hz high-pass DC stage, for live streams.
    pub fn streaming(n_channels: usize) -> Self {
        Self::new(n_channels, DcRemoval::streaming())
    }

    pub fn dc_removal(&self) -> DcRemoval {
        self.dc
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Runs a channel-major record through the chain, continuing from the
    /// current filter state.
    pub fn apply_record(&mut self, record: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DspError> {
        if record.len() != self.channels.len() {
            return Err(DspError::ChannelMismatch {
                expected: self.channels.len(),
                got: record.len(),
            });
        }
        let n = record.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(DspError::Empty);
        }
        if record.iter().any(|c| c.len() != n) {
            return Err(DspError::RaggedChannels);
        }
        Ok(record
            .iter()
            .zip(self.channels.iter_mut())
            .map(|(x, chain)| {
                let mean = match chain.dc {
                    None => x.iter().sum::<f64>() / n as f64,
                    Some(_) => 0.0,
                };
                x.iter()
                    .map(|&v| {
                        let d = match chain.dc.as_mut() {
                            None => v - mean,
                            Some(dc) => dc.process(v),
                        };
                        chain.tail(d)
                    })
                    .collect()
            })
            .collect())
    }

    /// Filters one multi-channel frame. Only available with the high-pass
    /// DC stage.
    pub fn push_frame(&mut self, frame: &[f64], out: &mut [f64]) -> Result<(), DspError> {
        if frame.len() != self.channels.len() || out.len() != self.channels.len() {
            return Err(DspError::ChannelMismatch {
                expected: self.channels.len(),
                got: frame.len(),
            });
        }
        for ((chain, &x), y) in self.channels.iter_mut().zip(frame).zip(out.iter_mut()) {
            let dc = chain.dc.as_mut().ok_or(DspError::StreamingRequiresHighPass)?;
            let d = dc.process(x);
            *y = chain.tail(d);
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        for c in &mut self.channels {
            if let Some(dc) = c.dc.as_mut() {
                dc.reset();
            }
            c.band.reset();
            c.notch.reset();
        }
    }
}
