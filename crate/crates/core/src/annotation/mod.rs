//! Turning per-frame gesture predictions into labeled time intervals.

mod export;
mod journal;
mod segmenter;

pub use export::{export_csv, parse_csv, summarize, write_csv, CsvError, CsvRecord, LabelSummary, Summary, CSV_HEADER};
pub use journal::{read_journal, JournalError, JournalRecord, SessionJournal};
pub use segmenter::{SegmentError, SegmentEvent, Segmenter};

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::gesture::GestureClass;

pub const MAX_LABELS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MappingError {
    #[error("at most {MAX_LABELS} labels may be mapped, got {0}")]
    TooMany(usize),
    #[error("NoGesture cannot carry a label")]
    NoGestureKey,
    #[error("label for {0} is empty")]
    EmptyLabel(GestureClass),
    #[error("label for {0} contains control characters")]
    ControlChars(GestureClass),
    #[error("label {0:?} is used more than once")]
    DuplicateLabel(String),
}

/// Gesture to user label, at most five entries with distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<GestureClass, String>", into = "BTreeMap<GestureClass, String>")]
pub struct LabelMapping(BTreeMap<GestureClass, String>);

impl LabelMapping {
    pub fn new(entries: BTreeMap<GestureClass, String>) -> Result<Self, MappingError> {
        if entries.len() > MAX_LABELS {
            return Err(MappingError::TooMany(entries.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for (&g, label) in &entries {
            if !g.is_gesture() {
                return Err(MappingError::NoGestureKey);
            }
            if label.is_empty() {
                return Err(MappingError::EmptyLabel(g));
            }
            if label.chars().any(char::is_control) {
                return Err(MappingError::ControlChars(g));
            }
            if !seen.insert(label.as_str()) {
                return Err(MappingError::DuplicateLabel(label.clone()));
            }
        }
        Ok(LabelMapping(entries))
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (GestureClass, S)>) -> Result<Self, MappingError> {
        let mut entries = BTreeMap::new();
        let mut count = 0;
        for (g, l) in pairs {
            count += 1;
            entries.insert(g, l.into());
        }
        if count > MAX_LABELS {
            return Err(MappingError::TooMany(count));
        }
        Self::new(entries)
    }

    pub fn label(&self, g: GestureClass) -> Option<&str> {
        self.0.get(&g).map(String::as_str)
    }

    pub fn contains(&self, g: GestureClass) -> bool {
        self.0.contains_key(&g)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GestureClass, &str)> {
        self.0.iter().map(|(&g, l)| (g, l.as_str()))
    }
}

impl TryFrom<BTreeMap<GestureClass, String>> for LabelMapping {
    type Error = MappingError;

    fn try_from(m: BTreeMap<GestureClass, String>) -> Result<Self, Self::Error> {
        LabelMapping::new(m)
    }
}

impl From<LabelMapping> for BTreeMap<GestureClass, String> {
    fn from(m: LabelMapping) -> Self {
        m.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("confidence_threshold must be in (0, 1), got {0}")]
    Threshold(f64),
    #[error("open_count and close_count must be at least 1")]
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmenterConfig {
    /// A frame counts only if its confidence is at least this value.
    pub confidence_threshold: f64,
    /// Consecutive matching frames needed to open an interval.
    pub open_count: u32,
    /// Consecutive non-matching frames that close an open interval.
    pub close_count: u32,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig { confidence_threshold: 0.7, open_count: 5, close_count: 10 }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = self.confidence_threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(ConfigError::Threshold(t));
        }
        if self.open_count < 1 || self.close_count < 1 {
            return Err(ConfigError::Count);
        }
        Ok(())
    }
}

/// Classifier verdict for one captured frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    /// Capture time, ms since session start.
    pub t_ms: u64,
    pub gesture: GestureClass,
    pub confidence: f64,
}

impl FramePrediction {
    pub fn none(t_ms: u64) -> Self {
        FramePrediction { t_ms, gesture: GestureClass::NoGesture, confidence: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationInterval {
    pub label: String,
    pub gesture: GestureClass,
    pub start_ms: u64,
    pub end_ms: u64,
    pub duration_ms: u64,
    pub mean_confidence: f64,
    pub frame_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Configured,
    Recording,
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub started_at: DateTime<Utc>,
    pub mapping: LabelMapping,
    pub intervals: Vec<AnnotationInterval>,
    pub state: SessionState,
}
