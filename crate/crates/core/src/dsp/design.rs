//! Digital IIR design by bilinear transform with cutoff prewarping.
//!
//! Butterworth filters are emitted as cascades of second-order sections; odd
//! orders carry one first-order section (stored with `b2 = a2 = 0`).

use serde::Serialize;
use std::f64::consts::PI;

/// One normalized section, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        let a0 = a[0];
        Self {
            b: [b[0] / a0, b[1] / a0, b[2] / a0],
            a: [1.0, a[1] / a0, a[2] / a0],
        }
    }

    /// Complex response at `freq_hz`, returned as (re, im).
    pub fn response(&self, freq_hz: f64, fs: f64) -> (f64, f64) {
        let w = 2.0 * PI * freq_hz / fs;
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
            let im = -c[1] * w.sin() - c[2] * (2.0 * w).sin();
            (re, im)
        };
        let (nr, ni) = eval(&self.b);
        let (dr, di) = eval(&self.a);
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Low,
    High,
}

/// Damping terms `2ζ` of the conjugate pole pairs of an analog Butterworth
/// prototype, plus whether a real pole at -1 is present.
fn prototype(order: usize) -> (Vec<f64>, bool) {
    let pairs = (0..order / 2)
        .map(|k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            -2.0 * theta.cos()
        })
        .collect();
    (pairs, order % 2 == 1)
}

fn butterworth(order: usize, cutoff_hz: f64, fs: f64, band: Band) -> Vec<Biquad> {
    assert!(order >= 1, "filter order must be positive");
    assert!(
        cutoff_hz > 0.0 && cutoff_hz < fs / 2.0,
        "cutoff must lie strictly inside (0, fs/2)"
    );
    let k = (PI * cutoff_hz / fs).tan();
    let (pairs, has_real) = prototype(order);
    let mut sections = Vec::with_capacity(pairs.len() + usize::from(has_real));
    if has_real {
        let a = [1.0 + k, k - 1.0, 0.0];
        let b = match band {
            Band::Low => [k, k, 0.0],
            Band::High => [1.0, -1.0, 0.0],
        };
        sections.push(Biquad::normalized(b, a));
    }
    for damping in pairs {
        let a = [1.0 + damping * k + k * k, 2.0 * k * k - 2.0, 1.0 - damping * k + k * k];
        let b = match band {
            Band::Low => [k * k, 2.0 * k * k, k * k],
            Band::High => [1.0, -2.0, 1.0],
        };
        sections.push(Biquad::normalized(b, a));
    }
    sections
}

pub fn butterworth_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> Vec<Biquad> {
    butterworth(order, cutoff_hz, fs, Band::Low)
}

pub fn butterworth_highpass(order: usize, cutoff_hz: f64, fs: f64) -> Vec<Biquad> {
    butterworth(order, cutoff_hz, fs, Band::High)
}

/// Second-order notch with a -3 dB width of `bandwidth_hz` around `center_hz`.
pub fn notch(center_hz: f64, bandwidth_hz: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * PI * center_hz / fs;
    let beta = (PI * bandwidth_hz / fs).tan();
    let gain = 1.0 / (1.0 + beta);
    Biquad {
        b: [gain, -2.0 * gain * w0.cos(), gain],
        a: [1.0, -2.0 * gain * w0.cos(), 2.0 * gain - 1.0],
    }
}

/// Magnitude of a section cascade at `freq_hz`.
pub fn cascade_gain(sections: &[Biquad], freq_hz: f64, fs: f64) -> f64 {
    sections
        .iter()
        .map(|s| {
            let (re, im) = s.response(freq_hz, fs);
            re.hypot(im)
        })
        .product()
}

/// Multiplies out a cascade into single transfer-function polynomials
/// `(b, a)`, trimmed to the true order. Used for coefficient dumps.
pub fn to_transfer_function(sections: &[Biquad]) -> (Vec<f64>, Vec<f64>) {
    fn mul(p: &[f64], q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len() + q.len() - 1];
        for (i, x) in p.iter().enumerate() {
            for (j, y) in q.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    let mut b = vec![1.0];
    let mut a = vec![1.0];
    for s in sections {
        let len = if s.a[2] == 0.0 && s.b[2] == 0.0 { 2 } else { 3 };
        b = mul(&b, &s.b[..len]);
        a = mul(&a, &s.a[..len]);
    }
    (b, a)
}
