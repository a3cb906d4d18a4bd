use serde::{Deserialize, Serialize};

use super::RuntimeError;
use crate::{LabelVector, FINGERS};

/// Angular acceleration per unit label, deg/s².
pub const DEFAULT_K_ALPHA: f64 = 60.0;
/// Force per unit label, N.
pub const DEFAULT_K_F: f64 = 10.0;
pub const ANGLE_MIN_DEG: f64 = 0.0;
pub const ANGLE_MAX_DEG: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub k_alpha: f64,
    #[serde(rename = "k_F")]
    pub k_f: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            k_alpha: DEFAULT_K_ALPHA,
            k_f: DEFAULT_K_F,
        }
    }
}

impl Gains {
    /// `k_F` must be positive; `k_alpha` may be zero, which freezes the
    /// acceleration.
    pub fn new(k_alpha: f64, k_f: f64) -> Result<Self, RuntimeError> {
        if !(k_alpha.is_finite() && k_alpha >= 0.0) {
            return Err(RuntimeError::InvalidGains(format!("k_alpha = {k_alpha} must be >= 0")));
        }
        if !(k_f.is_finite() && k_f > 0.0) {
            return Err(RuntimeError::InvalidGains(format!("k_F = {k_f} must be > 0")));
        }
        Ok(Self { k_alpha, k_f })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FingerState {
    /// Joint angle in degrees, within [0, 90].
    pub theta: f64,
    /// Angular velocity in deg/s.
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HandState {
    pub fingers: [FingerState; FINGERS],
    pub gains: Gains,
}

impl HandState {
    pub fn new(gains: Gains) -> Self {
        Self {
            fingers: [FingerState::default(); FINGERS],
            gains,
        }
    }

    pub fn angles(&self) -> [f64; FINGERS] {
        self.fingers.map(|f| f.theta)
    }
}

/// `F_j = k_F · label_j`.
pub fn force_map(labels: &LabelVector, k_f: f64) -> [f64; FINGERS] {
    labels.map(|l| k_f * l)
}

/// Semi-implicit Euler per finger: `α = k_α·label`, `ω += α·dt`,
/// `θ = clamp(θ + ω·dt, 0, 90)`; hitting a limit zeroes `ω`.
pub fn kinematics_step(state: &HandState, labels: &LabelVector, dt: f64) -> HandState {
    let mut next = *state;
    for (f, &label) in next.fingers.iter_mut().zip(labels) {
        f.omega += state.gains.k_alpha * label * dt;
        let theta = f.theta + f.omega * dt;
        if theta <= ANGLE_MIN_DEG || theta >= ANGLE_MAX_DEG {
            f.theta = theta.clamp(ANGLE_MIN_DEG, ANGLE_MAX_DEG);
            f.omega = 0.0;
        } else {
            f.theta = theta;
        }
    }
    next
}
