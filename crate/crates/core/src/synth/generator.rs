use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::mixing::{MixingMatrix, DEFAULT_CROSS_TALK};
use super::noise::BandNoise;
use super::{ActivationVector, SynthError};
use crate::seed::{self, tag};
use crate::{CHANNELS, SAMPLE_RATE};

pub const DEFAULT_NOISE_FLOOR: f64 = 0.01;
const MAINS_HZ: f64 = 50.0;
const MAINS_AMPLITUDE: f64 = 0.2;
const DRIFT_AMPLITUDE: f64 = 0.3;

/// Optional recording artifacts layered on top of the carrier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactFlags {
    /// Per-channel constant offset.
    pub dc: bool,
    /// 50 Hz power-line sinusoid.
    pub mains: bool,
    /// Sub-hertz baseline wander.
    pub drift: bool,
}

impl ArtifactFlags {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Self {
            dc: true,
            mains: true,
            drift: true,
        }
    }

    pub fn any(&self) -> bool {
        self.dc || self.mains || self.drift
    }
}

impl FromStr for ArtifactFlags {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut flags = Self::none();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "dc" => flags.dc = true,
                "mains" => flags.mains = true,
                "drift" => flags.drift = true,
                "none" => {}
                other => return Err(SynthError::UnknownArtifact(other.into())),
            }
        }
        Ok(flags)
    }
}

impl fmt::Display for ArtifactFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.dc, "dc"), (self.mains, "mains"), (self.drift, "drift")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub subject: usize,
    pub gesture: u8,
    pub repetition: usize,
    pub seed: u64,
}

/// A 12-channel record sampled at 1 kHz, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelSignal {
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: f64,
    pub meta: RecordMeta,
}

impl MultiChannelSignal {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frame(&self, i: usize) -> [f64; CHANNELS] {
        std::array::from_fn(|c| self.channels[c][i])
    }
}

#[derive(Debug, Clone)]
struct Artifacts {
    flags: ArtifactFlags,
    offset: [f64; CHANNELS],
    mains_phase: [f64; CHANNELS],
    drift_hz: [f64; CHANNELS],
    drift_phase: [f64; CHANNELS],
}

impl Artifacts {
    fn new(flags: ArtifactFlags, seed: u64) -> Self {
        let mut rng = seed::rng(seed, &[tag::ARTIFACT]);
        let mut draw = |lo: f64, hi: f64| -> [f64; CHANNELS] {
            std::array::from_fn(|_| rng.random_range(lo..hi))
        };
        Self {
            flags,
            offset: draw(0.2, 0.8),
            mains_phase: draw(0.0, 2.0 * PI),
            drift_hz: draw(0.1, 1.0),
            drift_phase: draw(0.0, 2.0 * PI),
        }
    }

    #[inline]
    fn value(&self, c: usize, t: f64) -> f64 {
        let mut v = 0.0;
        if self.flags.dc {
            v += self.offset[c];
        }
        if self.flags.mains {
            v += MAINS_AMPLITUDE * (2.0 * PI * MAINS_HZ * t + self.mains_phase[c]).sin();
        }
        if self.flags.drift {
            v += DRIFT_AMPLITUDE * (2.0 * PI * self.drift_hz[c] * t + self.drift_phase[c]).sin();
        }
        v
    }
}

/// Turns activations into multi-channel sEMG:
/// `x_c(t) = (g + (A a)_c) n_c(t) + artifacts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalGenerator {
    pub mixing: MixingMatrix,
    /// Absolute noise-floor amplitude `g` added to every channel.
    pub noise_floor: f64,
}

impl Default for SignalGenerator {
    fn default() -> Self {
        Self::new(MixingMatrix::nominal(DEFAULT_CROSS_TALK), DEFAULT_NOISE_FLOOR)
    }
}

impl SignalGenerator {
    /// `noise_floor_fraction` is relative to the largest mixing gain.
    pub fn new(mixing: MixingMatrix, noise_floor_fraction: f64) -> Self {
        let noise_floor = noise_floor_fraction * mixing.max_gain();
        Self {
            mixing,
            noise_floor,
        }
    }

    pub fn stream(&self, seed: u64, artifacts: ArtifactFlags) -> StreamingSynth {
        StreamingSynth {
            mixing: self.mixing.clone(),
            noise_floor: self.noise_floor,
            carriers: (0..CHANNELS).map(|c| BandNoise::new(seed, c)).collect(),
            artifacts: artifacts.any().then(|| Artifacts::new(artifacts, seed)),
            index: 0,
            amplitudes: [self.noise_floor; CHANNELS],
        }
    }

    pub fn generate(
        &self,
        activation: &ActivationVector,
        duration_s: f64,
        seed: u64,
        artifacts: ArtifactFlags,
    ) -> Result<MultiChannelSignal, SynthError> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(SynthError::InvalidDuration(duration_s));
        }
        let n = (duration_s * SAMPLE_RATE).round() as usize;
        let mut stream = self.stream(seed, artifacts);
        stream.set_activation(activation);
        let mut channels = vec![Vec::with_capacity(n); CHANNELS];
        for _ in 0..n {
            let frame = stream.next_frame();
            for (ch, v) in channels.iter_mut().zip(frame) {
                ch.push(v);
            }
        }
        Ok(MultiChannelSignal {
            channels,
            sample_rate: SAMPLE_RATE,
            meta: RecordMeta {
                seed,
                ..RecordMeta::default()
            },
        })
    }
}

/// Record generation with the nominal mixing matrix and 1 % noise floor.
pub fn generate_signal(
    activation: &ActivationVector,
    duration_s: f64,
    seed: u64,
    artifacts: ArtifactFlags,
) -> Result<MultiChannelSignal, SynthError> {
    SignalGenerator::default().generate(activation, duration_s, seed, artifacts)
}

/// Sample-by-sample generator whose activation can change at any sample.
/// With a constant activation it reproduces [`SignalGenerator::generate`]
/// exactly.
#[derive(Debug, Clone)]
pub struct StreamingSynth {
    mixing: MixingMatrix,
    noise_floor: f64,
    carriers: Vec<BandNoise>,
    artifacts: Option<Artifacts>,
    index: u64,
    amplitudes: [f64; CHANNELS],
}

impl StreamingSynth {
    pub fn set_activation(&mut self, activation: &ActivationVector) {
        let mix = self.mixing.amplitudes(activation);
        self.amplitudes = mix.map(|m| self.noise_floor + m);
    }

    /// Samples generated so far.
    pub fn position(&self) -> u64 {
        self.index
    }

    pub fn next_frame(&mut self) -> [f64; CHANNELS] {
        let t = self.index as f64 / SAMPLE_RATE;
        self.index += 1;
        std::array::from_fn(|c| {
            let v = self.amplitudes[c] * self.carriers[c].next_sample();
            match &self.artifacts {
                Some(art) => v + art.value(c, t),
                None => v,
            }
        })
    }
}
