//! Eight time-domain amplitude features per channel.
//!
//! | idx | name  | definition                                  | degree |
//! |-----|-------|---------------------------------------------|--------|
//! | 0   | RMS   | sqrt(1/N Σ x²)                              | 1      |
//! | 1   | MAV   | 1/N Σ \|x\|                                 | 1      |
//! | 2   | VAR   | 1/(N-1) Σ (x - x̄)²                          | 2      |
//! | 3   | SD    | sqrt(VAR)                                   | 1      |
//! | 4   | INT   | Σ \|x\|                                     | 1      |
//! | 5   | WL    | Σ \|x[i+1] - x[i]\|                         | 1      |
//! | 6   | DASDV | sqrt(1/(N-1) Σ (x[i+1] - x[i])²)            | 1      |
//! | 7   | DAMV  | 1/(N-1) Σ \|x[i+1] - x[i]\|                 | 1      |
//!
//! "Degree" is the homogeneity order: scaling a window by k scales the
//! feature by k^degree. VAR is the only quadratic one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::WindowedSegment;
use crate::{CHANNELS, FEATURES_PER_CHANNEL, INPUT_DIM};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("window of {0} samples is too short (need at least 2)")]
    TooShort(usize),
    #[error("segment has {0} channels, expected 12")]
    ChannelCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    Rms,
    Mav,
    Var,
    Sd,
    Int,
    Wl,
    Dasdv,
    Damv,
}

impl Feature {
    pub const ALL: [Feature; FEATURES_PER_CHANNEL] = [
        Feature::Rms,
        Feature::Mav,
        Feature::Var,
        Feature::Sd,
        Feature::Int,
        Feature::Wl,
        Feature::Dasdv,
        Feature::Damv,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Rms => "RMS",
            Feature::Mav => "MAV",
            Feature::Var => "VAR",
            Feature::Sd => "SD",
            Feature::Int => "INT",
            Feature::Wl => "WL",
            Feature::Dasdv => "DASDV",
            Feature::Damv => "DAMV",
        }
    }

    pub fn homogeneity_degree(self) -> i32 {
        match self {
            Feature::Var => 2,
            _ => 1,
        }
    }
}

/// Factor by which `feature` changes when its window is scaled by `k > 0`.
pub fn scaling_law(feature: Feature, k: f64) -> f64 {
    k.powi(feature.homogeneity_degree())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURES_PER_CHANNEL]);

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }
}

/// Features of one single-channel window.
pub fn extract(w: &[f64]) -> Result<FeatureVector, FeatureError> {
    let n = w.len();
    if n < 2 {
        return Err(FeatureError::TooShort(n));
    }
    let nf = n as f64;
    let (mut sum, mut sum_sq, mut sum_abs) = (0.0, 0.0, 0.0);
    for &x in w {
        sum += x;
        sum_sq += x * x;
        sum_abs += x.abs();
    }
    let mean = sum / nf;
    let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let (mut wl, mut diff_sq) = (0.0, 0.0);
    for pair in w.windows(2) {
        let d = pair[1] - pair[0];
        wl += d.abs();
        diff_sq += d * d;
    }
    Ok(FeatureVector([
        (sum_sq / nf).sqrt(),
        sum_abs / nf,
        var,
        var.sqrt(),
        sum_abs,
        wl,
        (diff_sq / (nf - 1.0)).sqrt(),
        wl / (nf - 1.0),
    ]))
}

/// 12 x 8 feature block, one row per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix(pub [[f64; FEATURES_PER_CHANNEL]; CHANNELS]);

impl FeatureMatrix {
    /// Row-major (channel-major) flattening used as model input.
    pub fn flatten(&self) -> [f64; INPUT_DIM] {
        let mut out = [0.0; INPUT_DIM];
        for (c, row) in self.0.iter().enumerate() {
            out[c * FEATURES_PER_CHANNEL..(c + 1) * FEATURES_PER_CHANNEL].copy_from_slice(row);
        }
        out
    }

    pub fn row(&self, channel: usize) -> FeatureVector {
        FeatureVector(self.0[channel])
    }
}

/// Extracts features channel by channel.
pub fn feature_matrix_from_channels<C: AsRef<[f64]>>(
    channels: &[C],
) -> Result<FeatureMatrix, FeatureError> {
    if channels.len() != CHANNELS {
        return Err(FeatureError::ChannelCount(channels.len()));
    }
    let mut m = [[0.0; FEATURES_PER_CHANNEL]; CHANNELS];
    for (row, ch) in m.iter_mut().zip(channels) {
        *row = extract(ch.as_ref())?.0;
    }
    Ok(FeatureMatrix(m))
}

pub fn feature_matrix(seg: &WindowedSegment) -> Result<FeatureMatrix, FeatureError> {
    feature_matrix_from_channels(&seg.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_features(got: FeatureVector, want: [f64; 8]) {
        for (i, (g, w)) in got.0.iter().zip(want).enumerate() {
            assert!((g - w).abs() < 1e-12, "{}: {g} vs {w}", Feature::ALL[i].name());
        }
    }

    #[test]
    fn hand_evaluated_examples() {
        assert_features(extract(&[0.0; 200]).unwrap(), [0.0; 8]);
        assert_features(
            extract(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            [1.0, 1.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0],
        );
        let s5 = 5f64.sqrt();
        let s2 = 2f64.sqrt();
        assert_features(
            extract(&[1.0, 3.0]).unwrap(),
            [s5, 2.0, 2.0, s2, 4.0, 2.0, 2.0, 2.0],
        );
        assert_eq!(extract(&[1.0]), Err(FeatureError::TooShort(1)));
    }

    #[test]
    fn scaling_law_examples() {
        assert!((scaling_law(Feature::Var, 0.7) - 0.49).abs() < 1e-15);
        assert_eq!(scaling_law(Feature::Rms, 0.5), 0.5);
        for f in Feature::ALL {
            assert_eq!(scaling_law(f, 1.0), 1.0);
        }
    }

    fn segment(channels: Vec<Vec<f64>>) -> WindowedSegment {
        WindowedSegment {
            data: channels,
            start_index: 0,
            label: None,
        }
    }

    #[test]
    fn matrix_rows_are_per_channel() {
        assert_eq!(
            feature_matrix(&segment(vec![vec![0.0; 200]; 12])).unwrap(),
            FeatureMatrix([[0.0; 8]; 12])
        );
        let mut data = vec![vec![0.0; 200]; 12];
        data[3] = (0..200).map(|i| (i % 7) as f64).collect();
        let m = feature_matrix(&segment(data.clone())).unwrap();
        for c in 0..12 {
            assert_eq!(m.0[c].iter().any(|&v| v != 0.0), c == 3);
        }
        data[5] = data[3].clone();
        let m = feature_matrix(&segment(data)).unwrap();
        assert_eq!(m.0[3], m.0[5]);
        let flat = m.flatten();
        assert_eq!(&flat[24..32], &m.0[3]);
        assert!(matches!(
            feature_matrix(&segment(vec![vec![0.0; 200]; 3])),
            Err(FeatureError::ChannelCount(3))
        ));
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    proptest! {
        #[test]
        fn features_are_homogeneous(
            w in prop::collection::vec(0.0f64..5.0, 2..300),
            k in 0.05f64..1.0,
        ) {
            let base = extract(&w).unwrap();
            let scaled: Vec<f64> = w.iter().map(|x| x * k).collect();
            let got = extract(&scaled).unwrap();
            for f in Feature::ALL {
                let want = scaling_law(f, k) * base.get(f);
                prop_assert!(rel_close(got.get(f), want, 1e-9), "{} {} {}", f.name(), got.get(f), want);
            }
        }

        #[test]
        fn features_are_monotone_in_scale(
            w in prop::collection::vec(0.0f64..5.0, 2..300),
            k1 in 0.01f64..1.0,
            dk in 0.0f64..1.0,
        ) {
            let k2 = k1 + dk;
            let a = extract(&w.iter().map(|x| x * k1).collect::<Vec<_>>()).unwrap();
            let b = extract(&w.iter().map(|x| x * k2).collect::<Vec<_>>()).unwrap();
            for f in Feature::ALL {
                prop_assert!(a.get(f) <= b.get(f) * (1.0 + 1e-12) + 1e-300);
            }
        }

        #[test]
        fn internal_consistency(w in prop::collection::vec(-3.0f64..3.0, 2..300)) {
            let v = extract(&w).unwrap();
            let n = w.len() as f64;
            prop_assert!(rel_close(v.get(Feature::Sd).powi(2), v.get(Feature::Var), 1e-9));
            prop_assert!(rel_close(v.get(Feature::Wl), (n - 1.0) * v.get(Feature::Damv), 1e-9));
            prop_assert!(v.0.iter().all(|&x| x >= 0.0));
        }
    }
}
