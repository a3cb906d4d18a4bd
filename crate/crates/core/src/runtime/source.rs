use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::synth::{labels_to_activation, ArtifactFlags, Finger, FingerLabels, MultiChannelSignal, SignalGenerator, StreamingSynth};
use crate::{LabelVector, CHANNELS, FINGERS, SAMPLE_RATE};

/// One 1 kHz sample of all channels with the labels that produced it
/// (known for synthetic sources, used by oracle decoders and scoring).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceFrame {
    pub samples: [f64; CHANNELS],
    pub labels: LabelVector,
}

/// A sample stream. `None` is an underrun: no sample for this slot.
pub trait FrameSource {
    fn next_frame(&mut self) -> Option<SourceFrame>;
}

/// Which fingers a scripted sine drives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptScope {
    /// All five fingers open and close together; the session still
    /// scores only its selected finger.
    #[default]
    Hand,
    /// Only the selected finger moves; the others rest at label 0, a
    /// posture no two-point training gesture contains.
    Finger,
}

impl std::str::FromStr for ScriptScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hand" => Ok(ScriptScope::Hand),
            "finger" => Ok(ScriptScope::Finger),
            other => Err(format!("unknown script scope {other:?} (hand or finger)")),
        }
    }
}

/// `label(t) = sin(2π f t)` with `t` counted from `start` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineScript {
    pub freq_hz: f64,
    pub finger: Finger,
    pub scope: ScriptScope,
    pub start: u64,
}

impl SineScript {
    pub fn target_at(&self, position: u64) -> f64 {
        let t = position.saturating_sub(self.start) as f64 / SAMPLE_RATE;
        (2.0 * PI * self.freq_hz * t).sin()
    }

    pub fn labels_at(&self, position: u64) -> LabelVector {
        let v = self.target_at(position);
        match self.scope {
            ScriptScope::Hand => [v; FINGERS],
            ScriptScope::Finger => {
                let mut l = [0.0; FINGERS];
                l[self.finger.index()] = v;
                l
            }
        }
    }
}

/// Live synthetic subject: labels come from sliders or a sine script.
#[derive(Debug, Clone)]
pub struct SynthSource {
    synth: StreamingSynth,
    labels: LabelVector,
    script: Option<SineScript>,
}

impl SynthSource {
    pub fn new(generator: &SignalGenerator, seed: u64, artifacts: ArtifactFlags) -> Self {
        Self {
            synth: generator.stream(seed, artifacts),
            labels: [0.0; FINGERS],
            script: None,
        }
    }

    /// Manual labels; values are clamped to [-1, 1].
    pub fn set_labels(&mut self, labels: LabelVector) {
        self.labels = labels.map(|v| v.clamp(-1.0, 1.0));
        self.apply(self.labels);
    }

    pub fn labels(&self) -> LabelVector {
        self.labels
    }

    /// Drives the activation from `script` on every sample until stopped.
    pub fn start_script(&mut self, script: SineScript) {
        self.script = Some(script);
    }

    /// Stops the script and returns to the slider labels.
    pub fn stop_script(&mut self) {
        self.script = None;
        self.apply(self.labels);
    }

    pub fn script(&self) -> Option<SineScript> {
        self.script
    }

    pub fn position(&self) -> u64 {
        self.synth.position()
    }

    fn apply(&mut self, labels: LabelVector) {
        let l = FingerLabels::new(labels.map(|v| v.clamp(-1.0, 1.0))).expect("clamped labels are valid");
        self.synth.set_activation(&labels_to_activation(&l));
    }
}

impl FrameSource for SynthSource {
    fn next_frame(&mut self) -> Option<SourceFrame> {
        let labels = match self.script {
            Some(s) => {
                let l = s.labels_at(self.synth.position());
                self.apply(l);
                l
            }
            None => self.labels,
        };
        Some(SourceFrame {
            samples: self.synth.next_frame(),
            labels,
        })
    }
}

/// File playback of a stored record; ends with `None`.
#[derive(Debug, Clone)]
pub struct Playback {
    signal: MultiChannelSignal,
    labels: LabelVector,
    pos: usize,
}

impl Playback {
    pub fn new(signal: MultiChannelSignal, labels: LabelVector) -> Self {
        Self { signal, labels, pos: 0 }
    }
}

impl FrameSource for Playback {
    fn next_frame(&mut self) -> Option<SourceFrame> {
        (self.pos < self.signal.len()).then(|| {
            let samples = self.signal.frame(self.pos);
            self.pos += 1;
            SourceFrame {
                samples,
                labels: self.labels,
            }
        })
    }
}
