//! Append-only `<session_id>.jsonl` session files.
//!
//! The first line is a `header` record; each closed interval is appended as an
//! `interval` record when it is emitted, and a `stopped` record marks a clean stop.
//! A crash therefore loses at most the interval that was still open.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{AnnotationInterval, LabelMapping, SegmenterConfig, SessionLog, SessionState};

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("journal line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum JournalRecord {
    Header {
        session_id: String,
        started_at: DateTime<Utc>,
        mapping: LabelMapping,
        config: SegmenterConfig,
    },
    Interval(AnnotationInterval),
    Stopped,
}

pub struct SessionJournal {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SessionJournal {
    pub fn path_for(dir: &Path, session_id: &str) -> PathBuf {
        dir.join(format!("{session_id}.jsonl"))
    }

    /// Creates the file and writes the header. Fails if the file already exists.
    pub fn create(
        dir: &Path,
        session_id: &str,
        started_at: DateTime<Utc>,
        mapping: &LabelMapping,
        config: &SegmenterConfig,
    ) -> Result<Self, JournalError> {
        std::fs::create_dir_all(dir)?;
        let path = Self::path_for(dir, session_id);
        let file = OpenOptions::new().write(true).create_new(true).open(&path)?;
        let mut j = SessionJournal { path, out: BufWriter::new(file) };
        j.append(&JournalRecord::Header {
            session_id: session_id.to_string(),
            started_at,
            mapping: mapping.clone(),
            config: *config,
        })?;
        Ok(j)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one record and flushes it to the OS.
    pub fn append(&mut self, rec: &JournalRecord) -> Result<(), JournalError> {
        serde_json::to_writer(&mut self.out, rec).map_err(std::io::Error::from)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

/// Rebuilds a session log from journal text. Without a `stopped` record the
/// session is reported as still recording.
pub fn read_journal(text: &str) -> Result<SessionLog, JournalError> {
    let mut log: Option<SessionLog> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| JournalError::Malformed { line, reason };
        let rec: JournalRecord = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        match (rec, log.as_mut()) {
            (JournalRecord::Header { session_id, started_at, mapping, .. }, None) => {
                log = Some(SessionLog {
                    session_id,
                    started_at,
                    mapping,
                    intervals: Vec::new(),
                    state: SessionState::Recording,
                });
            }
            (JournalRecord::Header { .. }, Some(_)) => return Err(bad("duplicate header".into())),
            (_, None) => return Err(bad("first record must be the header".into())),
            (JournalRecord::Interval(iv), Some(l)) => {
                if l.state == SessionState::Stopped {
                    return Err(bad("interval after stop".into()));
                }
                if iv.end_ms < iv.start_ms || iv.duration_ms != iv.end_ms - iv.start_ms {
                    return Err(bad("interval times are inconsistent".into()));
                }
                if l.mapping.label(iv.gesture) != Some(iv.label.as_str()) {
                    return Err(bad(format!("label {:?} does not match the mapping", iv.label)));
                }
                l.intervals.push(iv);
            }
            (JournalRecord::Stopped, Some(l)) => l.state = SessionState::Stopped,
        }
    }
    log.ok_or(JournalError::Malformed { line: 0, reason: "empty journal".into() })
}
