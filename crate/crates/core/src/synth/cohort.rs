use serde::{Deserialize, Serialize};

use super::generator::{ArtifactFlags, MultiChannelSignal, RecordMeta, SignalGenerator, DEFAULT_NOISE_FLOOR};
use super::mixing::{MixingMatrix, DEFAULT_CROSS_TALK};
use super::{gesture_table, labels_to_activation, FingerLabels, GestureSpec, SynthError};
use crate::seed::{self, tag};
use crate::{CHANNELS, SAMPLE_RATE};

/// Everything needed to regenerate a cohort bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortConfig {
    pub subjects: usize,
    pub reps: usize,
    pub duration_s: f64,
    pub seed: u64,
    /// Noise floor as a fraction of the largest mixing gain.
    pub noise_floor: f64,
    pub cross_talk: f64,
    /// Per-subject multiplicative jitter on every mixing gain.
    pub jitter: f64,
    pub artifacts: ArtifactFlags,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            subjects: 20,
            reps: 3,
            duration_s: 30.0,
            seed: 42,
            noise_floor: DEFAULT_NOISE_FLOOR,
            cross_talk: DEFAULT_CROSS_TALK,
            jitter: 0.2,
            artifacts: ArtifactFlags::none(),
        }
    }
}

impl CohortConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.subjects == 0 {
            return Err(SynthError::NoSubjects);
        }
        if self.reps == 0 {
            return Err(SynthError::NoRepetitions);
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(SynthError::InvalidDuration(self.duration_s));
        }
        Ok(())
    }

    /// Generator for one subject: the nominal mixing matrix with that
    /// subject's seeded jitter.
    pub fn subject_generator(&self, subject: usize) -> SignalGenerator {
        let mut rng = seed::rng(self.seed, &[tag::MIXING, subject as u64]);
        let mixing = MixingMatrix::nominal(self.cross_talk).jittered(&mut rng, self.jitter);
        SignalGenerator::new(mixing, self.noise_floor)
    }

    pub fn record_seed(&self, subject: usize, gesture: u8, rep: usize) -> u64 {
        seed::derive(
            self.seed,
            &[tag::RECORD, subject as u64, u64::from(gesture), rep as u64],
        )
    }

    pub fn subject(&self, subject: usize) -> SubjectCohort {
        SubjectCohort {
            config: self.clone(),
            subject,
            generator: self.subject_generator(subject),
        }
    }

    pub fn manifest(&self) -> CohortManifest {
        CohortManifest {
            config: self.clone(),
            sample_rate: SAMPLE_RATE,
            channels: CHANNELS,
            gestures: gesture_table(),
        }
    }

    pub fn generate(&self) -> Result<CohortDataset, SynthError> {
        self.validate()?;
        let mut records = Vec::with_capacity(self.subjects * self.reps * 10);
        for s in 0..self.subjects {
            records.extend(self.subject(s).records()?);
        }
        Ok(CohortDataset {
            manifest: self.manifest(),
            records,
        })
    }
}

/// Lazily generated records of one subject.
#[derive(Debug, Clone)]
pub struct SubjectCohort {
    pub config: CohortConfig,
    pub subject: usize,
    pub generator: SignalGenerator,
}

impl SubjectCohort {
    pub fn record(
        &self,
        gesture: &GestureSpec,
        rep: usize,
    ) -> Result<(MultiChannelSignal, FingerLabels), SynthError> {
        let seed = self.config.record_seed(self.subject, gesture.gesture_id, rep);
        let mut sig = self.generator.generate(
            &labels_to_activation(&gesture.labels),
            self.config.duration_s,
            seed,
            self.config.artifacts,
        )?;
        sig.meta = RecordMeta {
            subject: self.subject,
            gesture: gesture.gesture_id,
            repetition: rep,
            seed,
        };
        Ok((sig, gesture.labels))
    }

    /// All gestures of all repetitions, repetition-major.
    pub fn records(&self) -> Result<Vec<(MultiChannelSignal, FingerLabels)>, SynthError> {
        let gestures = gesture_table();
        let mut out = Vec::with_capacity(self.config.reps * gestures.len());
        for rep in 0..self.config.reps {
            for g in &gestures {
                out.push(self.record(g, rep)?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub config: CohortConfig,
    pub sample_rate: f64,
    pub channels: usize,
    pub gestures: Vec<GestureSpec>,
}

#[derive(Debug, Clone)]
pub struct CohortDataset {
    pub manifest: CohortManifest,
    pub records: Vec<(MultiChannelSignal, FingerLabels)>,
}

/// Default-parameter cohort: 1 % noise floor, 30 % cross-talk, ±20 %
/// subject jitter, no artifacts.
pub fn generate_cohort(
    n_subjects: usize,
    reps: usize,
    duration_s: f64,
    seed: u64,
) -> Result<CohortDataset, SynthError> {
    CohortConfig {
        subjects: n_subjects,
        reps,
        duration_s,
        seed,
        ..CohortConfig::default()
    }
    .generate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cohort_shape() {
        let c = generate_cohort(1, 1, 1.0, 7).unwrap();
        assert_eq!(c.records.len(), 10);
        for (sig, labels) in &c.records {
            assert_eq!(sig.channels.len(), 12);
            assert_eq!(sig.len(), 1000);
            assert_eq!(sig.sample_rate, 1000.0);
            let g = c
                .manifest
                .gestures
                .iter()
                .find(|g| g.gesture_id == sig.meta.gesture)
                .unwrap();
            assert_eq!(&g.labels, labels);
        }
    }

    #[test]
    fn full_cohort_record_count() {
        // short records keep this a pure counting check
        let cfg = CohortConfig {
            subjects: 20,
            reps: 3,
            duration_s: 0.01,
            ..CohortConfig::default()
        };
        assert_eq!(cfg.generate().unwrap().records.len(), 600);
    }

    #[test]
    fn cohorts_are_deterministic() {
        let a = generate_cohort(2, 1, 0.3, 42).unwrap();
        let b = generate_cohort(2, 1, 0.3, 42).unwrap();
        assert_eq!(a.records, b.records);
        let c = generate_cohort(2, 1, 0.3, 43).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn subjects_differ_in_mixing() {
        let cfg = CohortConfig::default();
        assert_ne!(cfg.subject_generator(0), cfg.subject_generator(1));
        assert_eq!(cfg.subject_generator(3), cfg.subject_generator(3));
    }

    #[test]
    fn zero_subjects_rejected() {
        assert!(matches!(generate_cohort(0, 3, 1.0, 1), Err(SynthError::NoSubjects)));
    }
}
