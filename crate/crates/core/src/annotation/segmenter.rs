use serde::{Deserialize, Serialize};

use super::{AnnotationInterval, ConfigError, FramePrediction, LabelMapping, SegmenterConfig};
use crate::gesture::GestureClass;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SegmentError {
    #[error("frame at t={t_ms} ms arrived after t={last_ms} ms")]
    OutOfOrderFrame { t_ms: u64, last_ms: u64 },
    #[error("frame confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SegmentEvent {
    Opened { gesture: GestureClass, label: String, start_ms: u64 },
    Closed(AnnotationInterval),
}

/// Consecutive frames matching one gesture.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Run {
    gesture: GestureClass,
    start_ms: u64,
    last_ms: u64,
    count: u64,
    conf_sum: f64,
}

impl Run {
    fn start(gesture: GestureClass, f: &FramePrediction) -> Self {
        Run { gesture, start_ms: f.t_ms, last_ms: f.t_ms, count: 1, conf_sum: f.confidence }
    }

    fn push(&mut self, f: &FramePrediction) {
        self.last_ms = f.t_ms;
        self.count += 1;
        self.conf_sum += f.confidence;
    }
}

fn advance(run: &mut Option<Run>, matched: Option<GestureClass>, f: &FramePrediction) {
    *run = match (run.take(), matched) {
        (_, None) => None,
        (Some(mut r), Some(g)) if r.gesture == g => {
            r.push(f);
            Some(r)
        }
        (_, Some(g)) => Some(Run::start(g, f)),
    };
}

#[derive(Debug, Clone, PartialEq)]
enum State {
    Idle { run: Option<Run> },
    Open { current: Run, misses: u32, candidate: Option<Run> },
}

/// Debounce state machine for one session.
///
/// A frame matches gesture `g` when its prediction is `g`, `g` is mapped, and
/// its confidence is at least the threshold. `open_count` consecutive matches of
/// one gesture open an interval starting at the first of them. While open,
/// `close_count` consecutive non-matching frames close it, and a run of
/// `open_count` matches of another mapped gesture closes it and opens the new
/// one on the same frame. Intervals end at their last matching frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmenter {
    mapping: LabelMapping,
    config: SegmenterConfig,
    last_t: Option<u64>,
    state: State,
}

impl Segmenter {
    pub fn new(mapping: LabelMapping, config: SegmenterConfig) -> Result<Self, SegmentError> {
        config.validate()?;
        Ok(Segmenter { mapping, config, last_t: None, state: State::Idle { run: None } })
    }

    pub fn mapping(&self) -> &LabelMapping {
        &self.mapping
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.config
    }

    pub fn open_gesture(&self) -> Option<GestureClass> {
        match &self.state {
            State::Open { current, .. } => Some(current.gesture),
            State::Idle { .. } => None,
        }
    }

    pub fn last_t_ms(&self) -> Option<u64> {
        self.last_t
    }

    /// The mapped gesture this frame counts toward, if any.
    pub fn matched(&self, f: &FramePrediction) -> Option<GestureClass> {
        (f.gesture.is_gesture() && self.mapping.contains(f.gesture) && f.confidence >= self.config.confidence_threshold)
            .then_some(f.gesture)
    }

    /// Rejects frames that [`ingest`](Self::ingest) would refuse, without changing state.
    pub fn check(&self, f: &FramePrediction) -> Result<(), SegmentError> {
        if !(0.0..=1.0).contains(&f.confidence) {
            return Err(SegmentError::InvalidConfidence(f.confidence));
        }
        if let Some(last_ms) = self.last_t {
            if f.t_ms < last_ms {
                return Err(SegmentError::OutOfOrderFrame { t_ms: f.t_ms, last_ms });
            }
        }
        Ok(())
    }

    pub fn ingest(&mut self, f: &FramePrediction) -> Result<Vec<SegmentEvent>, SegmentError> {
        self.check(f)?;
        self.last_t = Some(f.t_ms);
        let matched = self.matched(f);
        let n_on = u64::from(self.config.open_count);
        let mut events = Vec::new();

        let state = std::mem::replace(&mut self.state, State::Idle { run: None });
        self.state = match state {
            State::Idle { mut run } => {
                advance(&mut run, matched, f);
                match run {
                    Some(r) if r.count >= n_on => {
                        events.push(self.opened(&r));
                        State::Open { current: r, misses: 0, candidate: None }
                    }
                    run => State::Idle { run },
                }
            }
            State::Open { mut current, mut misses, mut candidate } => {
                if matched == Some(current.gesture) {
                    current.push(f);
                    State::Open { current, misses: 0, candidate: None }
                } else {
                    misses += 1;
                    advance(&mut candidate, matched, f);
                    match candidate {
                        Some(next) if next.count >= n_on => {
                            events.push(SegmentEvent::Closed(self.interval(&current)));
                            events.push(self.opened(&next));
                            State::Open { current: next, misses: 0, candidate: None }
                        }
                        _ if misses >= self.config.close_count => {
                            events.push(SegmentEvent::Closed(self.interval(&current)));
                            State::Idle { run: candidate }
                        }
                        _ => State::Open { current, misses, candidate },
                    }
                }
            }
        };
        Ok(events)
    }

    /// Closes any open interval at its last matching frame. Idempotent.
    pub fn finalize(&mut self) -> Option<AnnotationInterval> {
        match std::mem::replace(&mut self.state, State::Idle { run: None }) {
            State::Open { current, .. } => Some(self.interval(&current)),
            State::Idle { .. } => None,
        }
    }

    fn label(&self, g: GestureClass) -> String {
        self.mapping.label(g).expect("only mapped gestures match").to_string()
    }

    fn opened(&self, r: &Run) -> SegmentEvent {
        SegmentEvent::Opened { gesture: r.gesture, label: self.label(r.gesture), start_ms: r.start_ms }
    }

    fn interval(&self, r: &Run) -> AnnotationInterval {
        AnnotationInterval {
            label: self.label(r.gesture),
            gesture: r.gesture,
            start_ms: r.start_ms,
            end_ms: r.last_ms,
            duration_ms: r.last_ms - r.start_ms,
            mean_confidence: r.conf_sum / r.count as f64,
            frame_count: r.count,
        }
    }
}
