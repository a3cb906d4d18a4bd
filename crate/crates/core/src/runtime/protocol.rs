//! Wire messages: one JSON object per line (or per WebSocket text frame),
//! discriminated by `type`.
//!
//! Client to service: `set_activation`, `set_gains`, `session`,
//! `load_model`. Service to client: `hello`, `tick`, `ack`, `error`,
//! `skip`, `session_end`. Every control message gets exactly one `ack` or
//! `error`. Tick and skip messages share one gapless `seq` counter.

use serde::{Deserialize, Serialize};

use crate::eval::TrackingMetrics;
use crate::models::ModelKind;
use crate::synth::Finger;
use crate::LabelVector;

use super::kinematics::Gains;
use super::session::SessionMode;
use super::source::ScriptScope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    SetActivation {
        values: LabelVector,
    },
    SetGains {
        #[serde(default)]
        k_alpha: Option<f64>,
        #[serde(default, rename = "k_F")]
        k_f: Option<f64>,
    },
    Session {
        action: SessionAction,
        #[serde(default = "default_mode")]
        mode: SessionMode,
        #[serde(default)]
        freq: Option<f64>,
        #[serde(default)]
        finger: Option<FingerRef>,
        #[serde(default)]
        duration: Option<f64>,
        /// Let the service drive the synthetic activation from the target.
        #[serde(default)]
        scripted: Option<bool>,
        /// Fingers the script drives: "hand" (default) or "finger".
        #[serde(default)]
        scope: Option<ScriptScope>,
    },
    LoadModel {
        path: String,
    },
}

fn default_mode() -> SessionMode {
    SessionMode::Sine
}

impl ClientMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientMessage::SetActivation { .. } => "set_activation",
            ClientMessage::SetGains { .. } => "set_gains",
            ClientMessage::Session { .. } => "session",
            ClientMessage::LoadModel { .. } => "load_model",
        }
    }

    /// Range checks serde cannot express.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            ClientMessage::SetActivation { values } => {
                if values.iter().all(|v| v.is_finite() && v.abs() <= 1.0) {
                    Ok(())
                } else {
                    Err("activation values must lie in [-1, 1]".into())
                }
            }
            ClientMessage::SetGains { k_alpha, k_f } => {
                if k_alpha.is_none() && k_f.is_none() {
                    return Err("set_gains needs k_alpha or k_F".into());
                }
                Gains::new(k_alpha.unwrap_or(1.0), k_f.unwrap_or(1.0))
                    .map(|_| ())
                    .map_err(|e| e.to_string())
            }
            ClientMessage::Session { freq, duration, .. } => {
                if freq.is_some_and(|f| !(f.is_finite() && f > 0.0)) {
                    return Err("freq must be positive".into());
                }
                if duration.is_some_and(|d| !(d.is_finite() && d > 0.0)) {
                    return Err("duration must be positive".into());
                }
                Ok(())
            }
            ClientMessage::LoadModel { path } => {
                if path.is_empty() {
                    Err("empty path".into())
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionAction {
    Start,
    Stop,
}

/// A finger given by name ("index") or label position (3).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FingerRef {
    Index(usize),
    Name(String),
}

impl FingerRef {
    pub fn resolve(&self) -> Result<Finger, String> {
        match self {
            FingerRef::Index(i) => Finger::from_index(*i).ok_or_else(|| format!("unknown finger {i}")),
            FingerRef::Name(s) => s.parse().map_err(|e: crate::synth::SynthError| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        seq: u64,
        model: ModelKind,
        gains: Gains,
    },
    Tick {
        seq: u64,
        t: f64,
        labels: LabelVector,
        forces: [f64; 5],
        angles: [f64; 5],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<f64>,
    },
    /// The control was accepted and takes effect at tick `seq`.
    Ack {
        of: String,
        seq: u64,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        of: Option<String>,
        message: String,
    },
    /// Tick `seq` was not produced.
    Skip {
        seq: u64,
        reason: String,
    },
    SessionEnd {
        reason: String,
        freq: f64,
        finger: Finger,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metrics: Option<TrackingMetrics>,
        t: Vec<f64>,
        target: Vec<f64>,
        decoded: Vec<f64>,
    },
}

impl ServerMessage {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("server messages serialize");
        s.push('\n');
        s
    }
}

/// Parses one inbound line. On failure returns the `type` field when it
/// could be read, for the error reply.
pub fn parse_client(text: &str) -> Result<ClientMessage, (Option<String>, String)> {
    let value: serde_json::Value = serde_json::from_str(text.trim()).map_err(|e| (None, format!("malformed json: {e}")))?;
    let of = value.get("type").and_then(|t| t.as_str()).map(str::to_owned);
    let msg: ClientMessage = serde_json::from_value(value).map_err(|e| (of.clone(), e.to_string()))?;
    msg.validate().map_err(|e| (of, e))?;
    Ok(msg)
}
