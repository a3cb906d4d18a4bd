//! Real-time side: streaming decode every 50 ms, force map, finger
//! kinematics, scripted and human tracking sessions, and the telemetry
//! service.

mod decoder;
mod kinematics;
pub mod protocol;
mod server;
mod session;
mod source;

use thiserror::Error;

pub use decoder::{stream_decode, DecodeTick, StreamDecoder, LABEL_CLAMP};
pub use kinematics::{force_map, kinematics_step, FingerState, Gains, HandState, ANGLE_MAX_DEG, ANGLE_MIN_DEG, DEFAULT_K_ALPHA, DEFAULT_K_F};
pub use server::{serve, spawn_serve, ServeConfig, ServeHandle, ServeStats};
pub use session::{
    run_sine_session, scripted_sine_session, PassThrough, SessionConfig, SessionMode, SessionRecorder, TickDecoder,
    TrackingSession, MAX_CONSECUTIVE_SKIPS,
};
pub use source::{FrameSource, Playback, ScriptScope, SineScript, SourceFrame, SynthSource};

use crate::dsp::DspError;
use crate::eval::EvalError;
use crate::models::ModelError;
use crate::synth::SynthError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error("invalid session: {0}")]
    InvalidSession(String),
    #[error("session aborted after {0} consecutive dropped ticks")]
    SessionAborted(usize),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
