//! Preprocessing: DC removal, band-pass, notch, rectification and sliding
//! windows, for both stored records and live streams.

mod chain;
pub mod design;
mod iir;
mod window;

pub use chain::{
    bandpass_sections, notch_section, DcRemoval, FilterChain, BAND_HALF_ORDER, BAND_HIGH_HZ,
    BAND_LOW_HZ, NOTCH_HZ, NOTCH_WIDTH_HZ, STREAMING_DC_CUTOFF_HZ,
};
pub use iir::Cascade;
pub use window::{window, window_count, window_starts, WindowedSegment};

use crate::SAMPLE_RATE;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("empty input")]
    Empty,
    #[error("sample rate {0} Hz is not supported (only 1000 Hz)")]
    UnsupportedSampleRate(f64),
    #[error("record of {len} samples is shorter than one {need}-sample window")]
    TooShort { len: usize, need: usize },
    #[error("expected {expected} channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("channels have unequal lengths")]
    RaggedChannels,
    #[error("frame-by-frame filtering needs the high-pass DC stage")]
    StreamingRequiresHighPass,
}

/// Subtracts the mean of `x`.
pub fn remove_dc(x: &[f64]) -> Result<Vec<f64>, DspError> {
    if x.is_empty() {
        return Err(DspError::Empty);
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    Ok(x.iter().map(|v| v - mean).collect())
}

/// Causal order-6 Butterworth band-pass, 10-450 Hz.
pub fn bandpass(x: &[f64], fs: f64) -> Result<Vec<f64>, DspError> {
    if fs != SAMPLE_RATE {
        return Err(DspError::UnsupportedSampleRate(fs));
    }
    Ok(Cascade::new(bandpass_sections(fs)).process_slice(x))
}

/// Second-order 50 Hz notch (2 Hz wide) at 1 kHz.
pub fn notch50(x: &[f64]) -> Vec<f64> {
    Cascade::new(vec![notch_section(SAMPLE_RATE)]).process_slice(x)
}

pub fn rectify(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.abs()).collect()
}
