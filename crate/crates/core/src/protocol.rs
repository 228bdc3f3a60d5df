//! JSON messages exchanged on the session socket.
//!
//! Client to server: `frame`. Server to client: `recognition`, `interval`, `error`.
//! Every message is a JSON object with a `type` discriminator. Frames carry
//! keypoints only; no pixel data exists anywhere in the protocol.

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationInterval;
use crate::skeleton::{HandSkeleton, Handedness, SkeletonError, NUM_LANDMARKS};

/// Incoming frames larger than this are rejected before parsing.
pub const MAX_MESSAGE_BYTES: usize = 64 * 1024;
pub const MAX_HANDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandPayload {
    #[serde(default)]
    pub handedness: Handedness,
    pub landmarks: Vec<[f64; 3]>,
}

impl HandPayload {
    pub fn from_skeleton(s: &HandSkeleton) -> Self {
        HandPayload { handedness: s.handedness, landmarks: s.to_triples() }
    }

    pub fn skeleton(&self) -> Result<HandSkeleton, SkeletonError> {
        HandSkeleton::from_triples(&self.landmarks, self.handedness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMessage {
    pub session: String,
    pub seq: u64,
    /// Client capture time, ms since session start.
    pub t_capture_ms: u64,
    pub hands: Vec<HandPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Frame(FrameMessage),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalState {
    Idle,
    Open,
    JustOpened,
    JustClosed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionMessage {
    pub seq: u64,
    /// Lowercase gesture name or `"none"`.
    pub gesture: String,
    /// Mapped label; null when the gesture is not in the session mapping.
    pub label: Option<String>,
    pub confidence: f64,
    pub interval_state: IntervalState,
    /// Receipt to reply-enqueue time on the server.
    pub server_latency_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    UnknownType,
    UnknownSession,
    SessionMismatch,
    NotRecording,
    OutOfOrderFrame,
    InvalidFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMessage {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Recognition(RecognitionMessage),
    Interval(AnnotationInterval),
    Error(ErrorMessage),
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>, seq: Option<u64>) -> Self {
        ServerMessage::Error(ErrorMessage { code, message: message.into(), seq })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("message exceeds {MAX_MESSAGE_BYTES} bytes")]
    TooLarge,
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unknown message type {0:?}")]
    UnknownType(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
}

impl ProtocolError {
    pub fn code(&self) -> ErrorCode {
        match self {
            ProtocolError::TooLarge | ProtocolError::Malformed(_) => ErrorCode::Malformed,
            ProtocolError::UnknownType(_) => ErrorCode::UnknownType,
            ProtocolError::InvalidFrame(_) => ErrorCode::InvalidFrame,
        }
    }
}

/// Parses and validates one client text message.
pub fn parse_client_message(text: &str) -> Result<ClientMessage, ProtocolError> {
    if text.len() > MAX_MESSAGE_BYTES {
        return Err(ProtocolError::TooLarge);
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    let ty = value
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| ProtocolError::Malformed("missing string field \"type\"".into()))?;
    if ty != "frame" {
        return Err(ProtocolError::UnknownType(ty.to_string()));
    }
    let msg: ClientMessage = serde_json::from_value(value).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    let ClientMessage::Frame(f) = &msg;
    if f.hands.len() > MAX_HANDS {
        return Err(ProtocolError::InvalidFrame(format!("at most {MAX_HANDS} hands per frame")));
    }
    for (i, h) in f.hands.iter().enumerate() {
        if h.landmarks.len() != NUM_LANDMARKS {
            return Err(ProtocolError::InvalidFrame(format!(
                "hand {i} has {} landmarks, expected {NUM_LANDMARKS}",
                h.landmarks.len()
            )));
        }
    }
    Ok(msg)
}

pub fn parse_server_message(text: &str) -> Result<ServerMessage, ProtocolError> {
    serde_json::from_str(text).map_err(|e| ProtocolError::Malformed(e.to_string()))
}
