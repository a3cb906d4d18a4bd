//! Synthetic sEMG cohorts with known per-finger force labels.
//!
//! Each channel is a seeded band-limited noise carrier whose amplitude is a
//! fixed linear mix of ten muscle-group activations (five flexor groups, five
//! extensor groups) plus a small noise floor. Envelope amplitude is therefore
//! exactly proportional to activation, the property the two-point method
//! depends on.

mod cohort;
mod generator;
pub mod io;
mod mixing;
mod noise;

pub use cohort::{generate_cohort, CohortConfig, CohortDataset, CohortManifest, SubjectCohort};
pub use generator::{
    generate_signal, ArtifactFlags, MultiChannelSignal, RecordMeta, SignalGenerator,
    StreamingSynth,
};
pub use mixing::{MixingMatrix, DEFAULT_CROSS_TALK, EXTENSOR_BLOCK, FLEXOR_BLOCK};
pub use noise::BandNoise;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::{LabelVector, FINGERS};

/// Number of muscle-group activations (flexors then extensors).
pub const ACTIVATIONS: usize = 2 * FINGERS;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("label component {index} = {value} is outside [-1, 1]")]
    LabelOutOfRange { index: usize, value: f64 },
    #[error("at least one subject is required")]
    NoSubjects,
    #[error("at least one repetition is required")]
    NoRepetitions,
    #[error("unknown artifact '{0}' (expected dc, mains or drift)")]
    UnknownArtifact(String),
    #[error("unknown finger '{0}'")]
    UnknownFinger(String),
    #[error("unknown gesture id {0}")]
    UnknownGesture(u8),
    #[error("dataset i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("record file {path}: {reason}")]
    BadRecord { path: String, reason: String },
}

/// Finger positions in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finger {
    Little,
    Ring,
    Middle,
    Index,
    Thumb,
}

impl Finger {
    pub const ALL: [Finger; FINGERS] = [
        Finger::Little,
        Finger::Ring,
        Finger::Middle,
        Finger::Index,
        Finger::Thumb,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Finger> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Finger::Little => "little",
            Finger::Ring => "ring",
            Finger::Middle => "middle",
            Finger::Index => "index",
            Finger::Thumb => "thumb",
        }
    }
}

impl fmt::Display for Finger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Finger {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if let Ok(i) = lower.parse::<usize>() {
            return Finger::from_index(i).ok_or_else(|| SynthError::UnknownFinger(s.into()));
        }
        Finger::ALL
            .into_iter()
            .find(|f| f.name() == lower || (lower == "pinky" && *f == Finger::Little))
            .ok_or_else(|| SynthError::UnknownFinger(s.into()))
    }
}

/// Per-finger force labels in [-1, 1]; +1 is maximal flexion, -1 maximal
/// extension. Position 0 is the little finger, position 4 the thumb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; FINGERS]", into = "[f64; FINGERS]")]
pub struct FingerLabels([f64; FINGERS]);

impl FingerLabels {
    pub fn new(values: LabelVector) -> Result<Self, SynthError> {
        for (index, &value) in values.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(SynthError::LabelOutOfRange { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn zero() -> Self {
        Self([0.0; FINGERS])
    }

    /// Single-finger label with every other finger at rest; `value` is
    /// clamped into [-1, 1].
    pub fn single(finger: Finger, value: f64) -> Self {
        let mut v = [0.0; FINGERS];
        v[finger.index()] = value.clamp(-1.0, 1.0);
        Self(v)
    }

    pub fn values(&self) -> &LabelVector {
        &self.0
    }

    pub fn get(&self, finger: Finger) -> f64 {
        self.0[finger.index()]
    }
}

impl TryFrom<[f64; FINGERS]> for FingerLabels {
    type Error = SynthError;

    fn try_from(v: [f64; FINGERS]) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<FingerLabels> for [f64; FINGERS] {
    fn from(l: FingerLabels) -> Self {
        l.0
    }
}

/// Ten muscle-group activations in [0, 1]: five flexor groups then five
/// extensor groups, each in finger order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationVector(pub [f64; ACTIVATIONS]);

impl ActivationVector {
    pub fn flexor(&self, finger: Finger) -> f64 {
        self.0[finger.index()]
    }

    pub fn extensor(&self, finger: Finger) -> f64 {
        self.0[FINGERS + finger.index()]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.map(|a| a * k))
    }
}

/// Splits signed labels into flexor and extensor drive.
pub fn labels_to_activation(labels: &FingerLabels) -> ActivationVector {
    let mut a = [0.0; ACTIVATIONS];
    for (j, &l) in labels.values().iter().enumerate() {
        a[j] = l.max(0.0);
        a[FINGERS + j] = (-l).max(0.0);
    }
    ActivationVector(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureSpec {
    pub gesture_id: u8,
    pub name: String,
    pub labels: FingerLabels,
}

/// The ten held gestures. Each finger appears both fully flexed and fully
/// extended somewhere in the set.
pub fn gesture_table() -> Vec<GestureSpec> {
    const F: f64 = 1.0;
    const E: f64 = -1.0;
    // little, ring, middle, index, thumb
    let rows: [(&str, LabelVector); 10] = [
        ("extend all fingers", [E, E, E, E, E]),
        ("extend index and middle, flex others", [F, F, E, E, F]),
        ("flex index and middle, extend others", [E, E, F, F, E]),
        ("extend index, flex others", [F, F, F, E, F]),
        ("extend thumb and index, flex others", [F, F, F, E, E]),
        ("flex thumb and index, extend others", [E, E, E, F, F]),
        ("flex thumb and little, extend others", [F, E, E, E, F]),
        ("flex all fingers", [F, F, F, F, F]),
        ("extend little and middle, flex others", [E, F, E, F, F]),
        ("extend thumb and little, flex others", [E, F, F, F, E]),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, (name, labels))| GestureSpec {
            gesture_id: i as u8 + 1,
            name: (*name).to_string(),
            labels: FingerLabels(*labels),
        })
        .collect()
}

pub fn gesture(id: u8) -> Result<GestureSpec, SynthError> {
    gesture_table()
        .into_iter()
        .find(|g| g.gesture_id == id)
        .ok_or(SynthError::UnknownGesture(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gesture_examples() {
        let t = gesture_table();
        assert_eq!(t.len(), 10);
        assert_eq!(t[0].labels.values(), &[-1.0; 5]);
        assert_eq!(t[7].labels.values(), &[1.0; 5]);
        assert_eq!(t[3].labels.values(), &[1.0, 1.0, 1.0, -1.0, 1.0]);
        assert_eq!(gesture(4).unwrap(), t[3]);
        assert!(gesture(11).is_err());
    }

    #[test]
    fn table_covers_both_directions_per_finger() {
        let t = gesture_table();
        for j in 0..FINGERS {
            assert!(t.iter().any(|g| g.labels.values()[j] == 1.0));
            assert!(t.iter().any(|g| g.labels.values()[j] == -1.0));
            assert!(t.iter().all(|g| g.labels.values()[j].abs() == 1.0));
        }
    }

    #[test]
    fn activation_examples() {
        assert_eq!(labels_to_activation(&FingerLabels::zero()).0, [0.0; 10]);
        let a = labels_to_activation(&FingerLabels::new([1.0; 5]).unwrap());
        assert_eq!(&a.0[..5], &[1.0; 5]);
        assert_eq!(&a.0[5..], &[0.0; 5]);
        let a = labels_to_activation(&FingerLabels::new([-0.5, 0.0, 0.0, 0.0, 1.0]).unwrap());
        assert_eq!(&a.0[..5], &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(&a.0[5..], &[0.5, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn labels_reject_out_of_range() {
        assert!(FingerLabels::new([0.0, 1.2, 0.0, 0.0, 0.0]).is_err());
        assert!(FingerLabels::new([0.0, f64::NAN, 0.0, 0.0, 0.0]).is_err());
        let parsed: Result<FingerLabels, _> = serde_json::from_str("[0,0,0,0,2]");
        assert!(parsed.is_err());
    }

    #[test]
    fn finger_parsing() {
        assert_eq!("index".parse::<Finger>().unwrap(), Finger::Index);
        assert_eq!("Pinky".parse::<Finger>().unwrap(), Finger::Little);
        assert_eq!("4".parse::<Finger>().unwrap(), Finger::Thumb);
        assert!("toe".parse::<Finger>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn activation_split_is_exclusive(v in proptest::array::uniform5(-1.0f64..=1.0)) {
            let l = FingerLabels::new(v).unwrap();
            let a = labels_to_activation(&l);
            for f in Finger::ALL {
                proptest::prop_assert!(a.flexor(f) == 0.0 || a.extensor(f) == 0.0);
                proptest::prop_assert_eq!(a.flexor(f) - a.extensor(f), l.get(f));
            }
        }
    }
}
