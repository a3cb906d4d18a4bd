use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::OnceLock;

use crate::dsp::design::{butterworth_highpass, butterworth_lowpass, Biquad};
use crate::dsp::Cascade;
use crate::SAMPLE_RATE;

pub const CARRIER_LOW_HZ: f64 = 20.0;
pub const CARRIER_HIGH_HZ: f64 = 400.0;
const WARMUP: usize = 1000;

fn carrier_sections() -> Vec<Biquad> {
    let mut s = butterworth_highpass(2, CARRIER_LOW_HZ, SAMPLE_RATE);
    s.extend(butterworth_lowpass(4, CARRIER_HIGH_HZ, SAMPLE_RATE));
    s
}

/// 1 / sqrt(noise power gain) of the carrier filter.
fn unit_rms_scale() -> f64 {
    static SCALE: OnceLock<f64> = OnceLock::new();
    *SCALE.get_or_init(|| 1.0 / Cascade::new(carrier_sections()).impulse_energy(20_000).sqrt())
}

/// Unit-RMS Gaussian noise band-limited to 20-400 Hz, one independent
/// deterministic stream per (seed, channel).
#[derive(Debug, Clone)]
pub struct BandNoise {
    rng: ChaCha8Rng,
    filter: Cascade,
    scale: f64,
}

impl BandNoise {
    pub fn new(seed: u64, channel: usize) -> Self {
        let mut noise = Self {
            rng: crate::seed::rng(seed, &[channel as u64]),
            filter: Cascade::new(carrier_sections()),
            scale: unit_rms_scale(),
        };
        for _ in 0..WARMUP {
            noise.next_sample();
        }
        noise
    }

    #[inline]
    pub fn next_sample(&mut self) -> f64 {
        let w: f64 = self.rng.sample(StandardNormal);
        self.filter.process(w) * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carrier_has_unit_rms() {
        let mut n = BandNoise::new(11, 0);
        let xs: Vec<f64> = (0..60_000).map(|_| n.next_sample()).collect();
        let rms = (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((rms - 1.0).abs() < 0.03, "rms {rms}");
    }

    #[test]
    fn channels_are_independent_streams() {
        let mut a = BandNoise::new(5, 0);
        let mut b = BandNoise::new(5, 1);
        let mut c = BandNoise::new(5, 0);
        let xa: Vec<f64> = (0..100).map(|_| a.next_sample()).collect();
        let xb: Vec<f64> = (0..100).map(|_| b.next_sample()).collect();
        let xc: Vec<f64> = (0..100).map(|_| c.next_sample()).collect();
        assert_ne!(xa, xb);
        assert_eq!(xa, xc);
    }
}
