//! Sensor-free sEMG finger force decoding.
//!
//! A decoder is trained only on maximal-flexion (+1) and maximal-extension
//! (-1) contractions and relies on the near-linear amplitude/force
//! relationship of surface EMG to interpolate every intermediate force level.
//!
//! ```text
//! synth  -> 12-channel sEMG records at 1 kHz with known per-finger labels
//! dsp    -> DC removal, 10-450 Hz band-pass, 50 Hz notch, rectification,
//!           200 ms windows every 50 ms
//! features -> 8 time-domain amplitude features per channel (12 x 8)
//! models -> LN / DD / MLP / CNN regressors trained with Adam on MSE
//! eval   -> direction AUC, interpolation sweeps, fit verdicts, tracking
//! runtime -> streaming decode, force map, finger kinematics, service
//! ```

pub mod dsp;
pub mod eval;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod runtime;
pub mod seed;
pub mod synth;

mod error;

pub use error::Error;

/// Number of sEMG electrodes.
pub const CHANNELS: usize = 12;
/// Number of decoded fingers (little, ring, middle, index, thumb).
pub const FINGERS: usize = 5;
/// Acquisition rate in Hz.
pub const SAMPLE_RATE: f64 = 1000.0;
/// Window length in samples (200 ms).
pub const WINDOW_LEN: usize = 200;
/// Hop between consecutive windows in samples (50 ms).
pub const WINDOW_HOP: usize = 50;
/// Time-domain features per channel.
pub const FEATURES_PER_CHANNEL: usize = 8;
/// Flattened model input width (12 x 8).
pub const INPUT_DIM: usize = CHANNELS * FEATURES_PER_CHANNEL;

/// Model output: one force label per finger, little to thumb.
pub type LabelVector = [f64; FINGERS];
