use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use parking_lot::{Mutex, RwLock};
use rand::RngCore;

use gesturelog_core::annotation::{
    JournalError, JournalRecord, SegmentError, SegmentEvent, SessionJournal, MappingError,
};
use gesturelog_core::classifier::argmax;
use gesturelog_core::latency::LatencyStats;
use gesturelog_core::protocol::{ErrorCode, FrameMessage, IntervalState, RecognitionMessage, ServerMessage};
use gesturelog_core::{
    normalize, AnnotationInterval, FramePrediction, GestureClass, LabelMapping, LandmarkClassifier, Segmenter,
    SegmenterConfig, SessionLog, SessionState,
};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("session is {actual:?}, expected {expected:?}")]
    InvalidState { expected: SessionState, actual: SessionState },
    #[error(transparent)]
    InvalidMapping(#[from] MappingError),
    #[error("invalid segmenter config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Journal(#[from] JournalError),
}

/// 128 random bits as 32 lowercase hex characters.
pub fn new_session_id() -> String {
    let mut bytes = [0u8; 16];
    rand::thread_rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

/// One live annotation session. All mutation happens under the registry's
/// per-session lock, which serializes frame processing.
pub struct Session {
    id: String,
    started_at: DateTime<Utc>,
    state: SessionState,
    segmenter: Segmenter,
    last_seq: Option<u64>,
    intervals: Vec<AnnotationInterval>,
    latencies: Vec<f64>,
    journal: Option<SessionJournal>,
}

impl Session {
    pub fn new(
        id: String,
        started_at: DateTime<Utc>,
        mapping: LabelMapping,
        config: SegmenterConfig,
        log_dir: Option<&Path>,
    ) -> Result<Self, SessionError> {
        let journal = match log_dir {
            Some(dir) => Some(SessionJournal::create(dir, &id, started_at, &mapping, &config)?),
            None => None,
        };
        let segmenter = Segmenter::new(mapping, config).map_err(|e| SessionError::InvalidConfig(e.to_string()))?;
        Ok(Session {
            id,
            started_at,
            state: SessionState::Configured,
            segmenter,
            last_seq: None,
            intervals: Vec::new(),
            latencies: Vec::new(),
            journal,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn started_at(&self) -> DateTime<Utc> {
        self.started_at
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn start(&mut self) -> Result<(), SessionError> {
        self.expect_state(SessionState::Configured)?;
        self.state = SessionState::Recording;
        Ok(())
    }

    fn expect_state(&self, expected: SessionState) -> Result<(), SessionError> {
        if self.state != expected {
            return Err(SessionError::InvalidState { expected, actual: self.state });
        }
        Ok(())
    }

    /// Finalizes the open interval, flushes the journal and freezes the session.
    pub fn stop(&mut self) -> Result<SessionLog, SessionError> {
        self.expect_state(SessionState::Recording)?;
        if let Some(iv) = self.segmenter.finalize() {
            self.record_interval(iv)?;
        }
        if let Some(j) = self.journal.as_mut() {
            j.append(&JournalRecord::Stopped)?;
        }
        self.state = SessionState::Stopped;
        Ok(self.log())
    }

    fn record_interval(&mut self, iv: AnnotationInterval) -> Result<(), JournalError> {
        if let Some(j) = self.journal.as_mut() {
            j.append(&JournalRecord::Interval(iv.clone()))?;
        }
        self.intervals.push(iv);
        Ok(())
    }

    pub fn log(&self) -> SessionLog {
        SessionLog {
            session_id: self.id.clone(),
            started_at: self.started_at,
            mapping: self.segmenter.mapping().clone(),
            intervals: self.intervals.clone(),
            state: self.state,
        }
    }

    pub fn record_latency(&mut self, ms: f64) {
        self.latencies.push(ms);
    }

    pub fn latency_stats(&self) -> LatencyStats {
        LatencyStats::from_samples(&self.latencies)
    }

    /// Classifies the frame, feeds the segmenter and builds the replies in
    /// send order: the recognition message, then any closed intervals.
    /// Rejected frames produce a single error message and leave state untouched.
    pub fn process_frame(&mut self, msg: &FrameMessage, model: &LandmarkClassifier, received: Instant) -> Vec<ServerMessage> {
        let seq = Some(msg.seq);
        if msg.session != self.id {
            return vec![ServerMessage::error(ErrorCode::SessionMismatch, "frame addressed to another session", seq)];
        }
        if self.state != SessionState::Recording {
            return vec![ServerMessage::error(
                ErrorCode::NotRecording,
                format!("session is {:?}", self.state),
                seq,
            )];
        }
        if let Some(last) = self.last_seq {
            if msg.seq <= last {
                return vec![ServerMessage::error(
                    ErrorCode::OutOfOrderFrame,
                    format!("seq {} is not after {last}", msg.seq),
                    seq,
                )];
            }
        }

        let (best, confidence) = classify_hands(msg, model);
        let threshold = self.segmenter.config().confidence_threshold;
        let prediction = match best {
            Some(g) if confidence >= threshold => FramePrediction { t_ms: msg.t_capture_ms, gesture: g, confidence },
            _ => FramePrediction::none(msg.t_capture_ms),
        };

        let events = match self.segmenter.ingest(&prediction) {
            Ok(ev) => ev,
            Err(e @ SegmentError::OutOfOrderFrame { .. }) => {
                return vec![ServerMessage::error(ErrorCode::OutOfOrderFrame, e.to_string(), seq)]
            }
            Err(e) => return vec![ServerMessage::error(ErrorCode::InvalidFrame, e.to_string(), seq)],
        };
        self.last_seq = Some(msg.seq);

        let opened = events.iter().any(|e| matches!(e, SegmentEvent::Opened { .. }));
        let mut closed = Vec::new();
        for e in events {
            if let SegmentEvent::Closed(iv) = e {
                if let Err(err) = self.record_interval(iv.clone()) {
                    tracing::error!(session = %self.id, "journal write failed: {err}");
                }
                closed.push(iv);
            }
        }
        let interval_state = if opened {
            IntervalState::JustOpened
        } else if !closed.is_empty() {
            IntervalState::JustClosed
        } else if self.segmenter.open_gesture().is_some() {
            IntervalState::Open
        } else {
            IntervalState::Idle
        };

        let gesture = prediction.gesture;
        let mut replies = Vec::with_capacity(1 + closed.len());
        let latency = received.elapsed().as_secs_f64() * 1e3;
        self.record_latency(latency);
        replies.push(ServerMessage::Recognition(RecognitionMessage {
            seq: msg.seq,
            gesture: gesture.as_str().to_string(),
            label: self.segmenter.mapping().label(gesture).map(str::to_string),
            confidence,
            interval_state,
            server_latency_ms: latency,
        }));
        replies.extend(closed.into_iter().map(ServerMessage::Interval));
        replies
    }
}

/// Picks the hand whose top class probability is highest. Degenerate or
/// invalid hands are skipped; no usable hand yields `(None, 0.0)`.
pub fn classify_hands(msg: &FrameMessage, model: &LandmarkClassifier) -> (Option<GestureClass>, f64) {
    let mut best: (Option<GestureClass>, f64) = (None, 0.0);
    for hand in &msg.hands {
        let Ok(features) = hand.skeleton().and_then(|s| normalize(&s)) else { continue };
        let p = model.predict(&features);
        let k = argmax(&p);
        if best.0.is_none() || p[k] > best.1 {
            best = (GestureClass::from_index(k), p[k]);
        }
    }
    best
}

pub type SessionHandle = Arc<Mutex<Session>>;

#[derive(Default)]
pub struct Registry {
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

impl Registry {
    pub fn create(
        &self,
        mapping: LabelMapping,
        config: SegmenterConfig,
        log_dir: Option<&Path>,
    ) -> Result<(String, DateTime<Utc>), SessionError> {
        let started_at = Utc::now()
            .duration_trunc(TimeDelta::milliseconds(1))
            .expect("millisecond truncation");
        let id = new_session_id();
        let session = Session::new(id.clone(), started_at, mapping, config, log_dir)?;
        self.sessions.write().insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok((id, started_at))
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, SessionError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
