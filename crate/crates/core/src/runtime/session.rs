use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eval::{tracking_metrics, TrackingMetrics};
use crate::models::ModelCheckpoint;
use crate::synth::{ArtifactFlags, Finger, SignalGenerator};
use crate::{SAMPLE_RATE, WINDOW_HOP, WINDOW_LEN};

use super::decoder::{DecodeTick, StreamDecoder};
use super::source::{FrameSource, ScriptScope, SineScript, SourceFrame, SynthSource};
use super::RuntimeError;

/// A session aborts once more than this many ticks in a row are dropped.
pub const MAX_CONSECUTIVE_SKIPS: usize = 10;

/// Anything that turns frames into ticks at the 50-sample cadence.
pub trait TickDecoder {
    fn push(&mut self, frame: &SourceFrame) -> Result<Option<DecodeTick>, RuntimeError>;
}

impl TickDecoder for StreamDecoder {
    fn push(&mut self, frame: &SourceFrame) -> Result<Option<DecodeTick>, RuntimeError> {
        self.push_frame(&frame.samples)
    }
}

/// Oracle decoder whose labels are the source's own labels at the newest
/// sample of each window.
#[derive(Debug, Clone, Default)]
pub struct PassThrough {
    samples: u64,
}

impl TickDecoder for PassThrough {
    fn push(&mut self, frame: &SourceFrame) -> Result<Option<DecodeTick>, RuntimeError> {
        self.samples += 1;
        let n = self.samples as usize;
        if n < WINDOW_LEN || (n - WINDOW_LEN) % WINDOW_HOP != 0 {
            return Ok(None);
        }
        Ok(Some(DecodeTick {
            index: ((n - WINDOW_LEN) / WINDOW_HOP) as u64,
            t: n as f64 / SAMPLE_RATE,
            start_index: (n - WINDOW_LEN) as u64,
            labels: frame.labels,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    Sine,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub freq_hz: f64,
    pub duration_s: f64,
    pub finger: Finger,
    /// Fingers moved by a scripted source.
    #[serde(default)]
    pub scope: ScriptScope,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            freq_hz: 0.1,
            duration_s: 60.0,
            finger: Finger::Index,
            scope: ScriptScope::Hand,
        }
    }
}

impl SessionConfig {
    /// The run has to cover at least two periods.
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(RuntimeError::InvalidSession(format!("frequency {} Hz", self.freq_hz)));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(RuntimeError::InvalidSession(format!("duration {} s", self.duration_s)));
        }
        if self.freq_hz * self.duration_s < 2.0 {
            return Err(RuntimeError::InvalidSession(format!(
                "{} s at {} Hz covers fewer than two periods",
                self.duration_s, self.freq_hz
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> u64 {
        (self.duration_s * SAMPLE_RATE).round() as u64
    }
}

/// Time-aligned target and decoded series of one finger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSession {
    pub mode: SessionMode,
    pub freq_hz: f64,
    pub amplitude: f64,
    pub finger: Finger,
    /// Seconds since session start of each window's newest sample.
    pub times: Vec<f64>,
    pub target: Vec<f64>,
    pub decoded: Vec<f64>,
    pub skipped: usize,
    /// Only for sine sessions.
    pub metrics: Option<TrackingMetrics>,
}

/// Incremental session bookkeeping shared by the offline runner and the
/// service loop.
#[derive(Debug, Clone)]
pub struct SessionRecorder {
    session: TrackingSession,
    start_sample: u64,
    consecutive_skips: usize,
}

impl SessionRecorder {
    pub fn new(mode: SessionMode, freq_hz: f64, finger: Finger, start_sample: u64) -> Self {
        Self {
            session: TrackingSession {
                mode,
                freq_hz,
                amplitude: 1.0,
                finger,
                times: Vec::new(),
                target: Vec::new(),
                decoded: Vec::new(),
                skipped: 0,
                metrics: None,
            },
            start_sample,
            consecutive_skips: 0,
        }
    }

    pub fn start_sample(&self) -> u64 {
        self.start_sample
    }

    pub fn session(&self) -> &TrackingSession {
        &self.session
    }

    /// Session time of a tick, from the newest sample of its window.
    pub fn time_of(&self, tick: &DecodeTick) -> f64 {
        let newest = tick.start_index + WINDOW_LEN as u64 - 1;
        newest.saturating_sub(self.start_sample) as f64 / SAMPLE_RATE
    }

    pub fn target_at(&self, t: f64) -> Option<f64> {
        match self.session.mode {
            SessionMode::Sine => Some(self.session.amplitude * (2.0 * PI * self.session.freq_hz * t).sin()),
            SessionMode::Free => None,
        }
    }

    /// Records a tick and returns its target.
    pub fn record(&mut self, tick: &DecodeTick) -> Option<f64> {
        self.consecutive_skips = 0;
        let t = self.time_of(tick);
        let target = self.target_at(t);
        self.session.times.push(t);
        self.session.target.push(target.unwrap_or(0.0));
        self.session.decoded.push(tick.labels[self.session.finger.index()]);
        target
    }

    /// Counts a missing tick; errors once the burst limit is exceeded.
    pub fn skip(&mut self) -> Result<(), RuntimeError> {
        self.session.skipped += 1;
        self.consecutive_skips += 1;
        if self.consecutive_skips > MAX_CONSECUTIVE_SKIPS {
            return Err(RuntimeError::SessionAborted(self.consecutive_skips));
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<TrackingSession, RuntimeError> {
        if self.session.mode == SessionMode::Sine {
            self.session.metrics = Some(tracking_metrics(&self.session.target, &self.session.decoded)?);
        }
        Ok(self.session)
    }
}

/// Runs a sine session over `config.duration_s` of source slots. Every
/// 50th slot (after the first full window) is a tick deadline; a deadline
/// without a fresh tick (underrun or model fault) is a skip.
pub fn run_sine_session(
    config: &SessionConfig,
    source: &mut dyn FrameSource,
    decoder: &mut dyn TickDecoder,
) -> Result<TrackingSession, RuntimeError> {
    config.validate()?;
    let mut rec = SessionRecorder::new(SessionMode::Sine, config.freq_hz, config.finger, 0);
    let mut fresh: Option<DecodeTick> = None;
    for slot in 0..config.samples() {
        if let Some(frame) = source.next_frame() {
            if let Some(tick) = decoder.push(&frame)? {
                fresh = Some(tick);
            }
        }
        let n = slot as usize + 1;
        if n >= WINDOW_LEN && (n - WINDOW_LEN) % WINDOW_HOP == 0 {
            match fresh.take() {
                Some(tick) => {
                    rec.record(&tick);
                }
                None => rec.skip()?,
            }
        }
    }
    rec.finish()
}

/// Closed-loop scripted run: the synthetic subject's activation follows
/// the target sine and a fresh streaming decoder reads it.
pub fn scripted_sine_session(
    generator: &SignalGenerator,
    seed: u64,
    ckpt: &ModelCheckpoint,
    config: &SessionConfig,
) -> Result<TrackingSession, RuntimeError> {
    let mut source = SynthSource::new(generator, seed, ArtifactFlags::none());
    source.start_script(SineScript {
        freq_hz: config.freq_hz,
        finger: config.finger,
        scope: config.scope,
        start: 0,
    });
    let mut decoder = StreamDecoder::new(ckpt.clone());
    run_sine_session(config, &mut source, &mut decoder)
}
