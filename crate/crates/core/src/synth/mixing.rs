use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ActivationVector, ACTIVATIONS};
use crate::{CHANNELS, FINGERS};

/// Default leakage of each muscle group onto the opposite electrode group.
pub const DEFAULT_CROSS_TALK: f64 = 0.3;

/// Gain of each flexor group (columns, little..thumb) on the six volar
/// electrodes (channels 0-5). Neighbouring fingers share electrodes; the
/// last row sits over the muscle belly and picks up every group.
pub const FLEXOR_BLOCK: [[f64; FINGERS]; 6] = [
    [1.00, 0.45, 0.10, 0.05, 0.05],
    [0.40, 1.00, 0.35, 0.10, 0.05],
    [0.10, 0.40, 1.00, 0.35, 0.10],
    [0.05, 0.10, 0.40, 1.00, 0.30],
    [0.05, 0.05, 0.15, 0.40, 1.00],
    [0.20, 0.30, 0.50, 0.30, 0.60],
];

/// Gain of each extensor group on the six dorsal electrodes (channels 6-11).
pub const EXTENSOR_BLOCK: [[f64; FINGERS]; 6] = [
    [1.00, 0.35, 0.10, 0.05, 0.10],
    [0.45, 1.00, 0.40, 0.10, 0.05],
    [0.10, 0.45, 1.00, 0.40, 0.10],
    [0.05, 0.10, 0.35, 1.00, 0.45],
    [0.10, 0.05, 0.10, 0.35, 1.00],
    [0.50, 0.30, 0.20, 0.30, 0.40],
];

/// Nonnegative 12 x 10 map from activations to channel amplitudes.
///
/// Column `j` (flexor of finger `j`) is `FLEXOR_BLOCK[.][j]` on channels 0-5
/// and `cross_talk * EXTENSOR_BLOCK[.][j]` on channels 6-11; extensor columns
/// mirror this. For `cross_talk < 1` the matrix has full column rank because
/// both blocks do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingMatrix {
    pub gains: [[f64; ACTIVATIONS]; CHANNELS],
}

impl MixingMatrix {
    pub fn nominal(cross_talk: f64) -> Self {
        let mut gains = [[0.0; ACTIVATIONS]; CHANNELS];
        for r in 0..6 {
            for j in 0..FINGERS {
                gains[r][j] = FLEXOR_BLOCK[r][j];
                gains[r][FINGERS + j] = cross_talk * FLEXOR_BLOCK[r][j];
                gains[6 + r][j] = cross_talk * EXTENSOR_BLOCK[r][j];
                gains[6 + r][FINGERS + j] = EXTENSOR_BLOCK[r][j];
            }
        }
        Self { gains }
    }

    /// Multiplies every entry by an independent factor in `1 ± spread`.
    pub fn jittered<R: Rng>(&self, rng: &mut R, spread: f64) -> Self {
        let mut gains = self.gains;
        for row in gains.iter_mut() {
            for g in row.iter_mut() {
                *g *= 1.0 + rng.random_range(-spread..=spread);
            }
        }
        Self { gains }
    }

    pub fn max_gain(&self) -> f64 {
        self.gains.iter().flatten().fold(0.0, |m, &g| m.max(g))
    }

    /// `(A a)_c` for every channel.
    pub fn amplitudes(&self, a: &ActivationVector) -> [f64; CHANNELS] {
        let mut out = [0.0; CHANNELS];
        for (o, row) in out.iter_mut().zip(&self.gains) {
            *o = row.iter().zip(&a.0).map(|(g, x)| g * x).sum();
        }
        out
    }
}
