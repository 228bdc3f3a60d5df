use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five recognised hand gestures plus the absence marker.
///
/// `NoGesture` is never produced by the classifier; it is assigned downstream
/// when no hand is visible or confidence falls below threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureClass {
    Fist,
    Ok,
    Stop,
    TwoUp,
    Peace,
    #[serde(rename = "none")]
    NoGesture,
}

/// Classifier output order. Index `i` of a probability vector refers to `CLASS_ORDER[i]`.
pub const CLASS_ORDER: [GestureClass; 5] = [
    GestureClass::Fist,
    GestureClass::Ok,
    GestureClass::Stop,
    GestureClass::TwoUp,
    GestureClass::Peace,
];

pub const NUM_CLASSES: usize = CLASS_ORDER.len();

impl GestureClass {
    /// Position in [`CLASS_ORDER`], `None` for `NoGesture`.
    pub fn index(self) -> Option<usize> {
        match self {
            GestureClass::Fist => Some(0),
            GestureClass::Ok => Some(1),
            GestureClass::Stop => Some(2),
            GestureClass::TwoUp => Some(3),
            GestureClass::Peace => Some(4),
            GestureClass::NoGesture => None,
        }
    }

    pub fn from_index(i: usize) -> Option<GestureClass> {
        CLASS_ORDER.get(i).copied()
    }

    /// Lowercase wire name (`"two_up"`, `"none"`, ...).
    pub fn as_str(self) -> &'static str {
        match self {
            GestureClass::Fist => "fist",
            GestureClass::Ok => "ok",
            GestureClass::Stop => "stop",
            GestureClass::TwoUp => "two_up",
            GestureClass::Peace => "peace",
            GestureClass::NoGesture => "none",
        }
    }

    pub fn is_gesture(self) -> bool {
        self != GestureClass::NoGesture
    }
}

impl fmt::Display for GestureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gesture name {0:?}")]
pub struct UnknownGesture(pub String);

impl FromStr for GestureClass {
    type Err = UnknownGesture;

    /// Accepts the wire names plus a few common spellings (`"Two-Up"`, `"twoup"`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "fist" => Ok(GestureClass::Fist),
            "ok" => Ok(GestureClass::Ok),
            "stop" => Ok(GestureClass::Stop),
            "twoup" => Ok(GestureClass::TwoUp),
            "peace" => Ok(GestureClass::Peace),
            "none" | "nogesture" => Ok(GestureClass::NoGesture),
            _ => Err(UnknownGesture(s.to_string())),
        }
    }
}
