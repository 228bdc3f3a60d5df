//! Recorded keypoint streams for replay.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use gesturelog_core::dataset::{jitter, prototypes, SyntheticParams};
use gesturelog_core::protocol::{FrameMessage, HandPayload};
use gesturelog_core::{GestureClass, CLASS_ORDER};

use crate::ToolError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame {
    /// Capture time, ms since the first frame of the recording.
    pub t_capture_ms: u64,
    pub hands: Vec<HandPayload>,
}

/// Frames in capture order. Gaps between frames are the differences of
/// consecutive capture times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayTrace {
    pub fps: f64,
    pub frames: Vec<TraceFrame>,
}

impl ReplayTrace {
    pub fn validate(&self) -> Result<(), ToolError> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(ToolError::invalid(format!("trace fps must be positive, got {}", self.fps)));
        }
        for (i, w) in self.frames.windows(2).enumerate() {
            if w[1].t_capture_ms <= w[0].t_capture_ms {
                return Err(ToolError::invalid(format!(
                    "trace frame {} at {} ms does not follow {} ms",
                    i + 1,
                    w[1].t_capture_ms,
                    w[0].t_capture_ms
                )));
            }
        }
        Ok(())
    }

    pub fn gaps_ms(&self) -> Vec<u64> {
        self.frames.windows(2).map(|w| w[1].t_capture_ms - w[0].t_capture_ms).collect()
    }

    pub fn duration_ms(&self) -> u64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => b.t_capture_ms - a.t_capture_ms,
            _ => 0,
        }
    }

    /// Frame `i` as a wire message for `session`, with `seq = i`.
    pub fn message(&self, session: &str, i: usize) -> FrameMessage {
        let f = &self.frames[i];
        FrameMessage { session: session.to_string(), seq: i as u64, t_capture_ms: f.t_capture_ms, hands: f.hands.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self, ToolError> {
        let t: ReplayTrace = serde_json::from_str(text).map_err(|e| ToolError::invalid(format!("trace: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self, ToolError> {
        let text = std::fs::read_to_string(path).map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// Capture time of frame `i` at `fps`, truncated to whole milliseconds.
pub fn frame_time_ms(i: usize, fps: f64) -> u64 {
    (i as f64 * 1000.0 / fps).floor() as u64
}

/// A run of `frames` frames showing `gesture`, or no hand when `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub gesture: Option<GestureClass>,
    pub frames: usize,
}

/// Renders segments into a trace. Gesture frames are jittered prototypes
/// when `params` is given and exact prototypes otherwise.
pub fn scripted_trace(segments: &[Segment], fps: f64, params: Option<&SyntheticParams>, seed: u64) -> ReplayTrace {
    let protos = prototypes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::new();
    for seg in segments {
        for _ in 0..seg.frames {
            let hands = match seg.gesture.and_then(|g| g.index()) {
                Some(k) => {
                    let proto = &protos[k].1;
                    let s = params.map_or_else(|| proto.clone(), |p| jitter(proto, p, &mut rng));
                    vec![HandPayload::from_skeleton(&s)]
                }
                None => Vec::new(),
            };
            frames.push(TraceFrame { t_capture_ms: frame_time_ms(frames.len(), fps), hands });
        }
    }
    ReplayTrace { fps, frames }
}

/// Five exact Fist frames at 30 fps: capture times 0, 33, 66, 100, 133.
pub fn five_fist_trace() -> ReplayTrace {
    scripted_trace(&[Segment { gesture: Some(GestureClass::Fist), frames: 5 }], 30.0, None, 0)
}

/// Random alternation of held gestures (15 to 90 frames) and empty stretches
/// (0 to 40 frames) filling `seconds` of capture at `fps`.
pub fn random_script(seconds: f64, fps: f64, seed: u64) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (seconds * fps).round() as usize;
    let mut out = Vec::new();
    let mut n = 0;
    while n < total {
        let g = CLASS_ORDER[rng.gen_range(0..CLASS_ORDER.len())];
        let held = rng.gen_range(15..=90).min(total - n);
        out.push(Segment { gesture: Some(g), frames: held });
        n += held;
        let gap = rng.gen_range(0..=40).min(total - n);
        if gap > 0 {
            out.push(Segment { gesture: None, frames: gap });
            n += gap;
        }
    }
    out
}

/// Jittered random script of `seconds` at `fps`.
pub fn synthetic_trace(seconds: f64, fps: f64, seed: u64) -> ReplayTrace {
    let params = SyntheticParams::default();
    scripted_trace(&random_script(seconds, fps, seed), fps, Some(&params), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_fist_times() {
        let t = five_fist_trace();
        let times: Vec<u64> = t.frames.iter().map(|f| f.t_capture_ms).collect();
        assert_eq!(times, [0, 33, 66, 100, 133]);
        assert_eq!(t.gaps_ms(), [33, 33, 34, 33]);
        assert!(t.frames.iter().all(|f| f.hands.len() == 1));
    }

    #[test]
    fn synthetic_length_and_determinism() {
        let t = synthetic_trace(10.0, 30.0, 4);
        assert_eq!(t.frames.len(), 300);
        t.validate().unwrap();
        assert_eq!(t, synthetic_trace(10.0, 30.0, 4));
        assert_eq!(ReplayTrace::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn rejects_non_increasing_times() {
        let mut t = five_fist_trace();
        t.frames[2].t_capture_ms = 33;
        assert!(t.validate().is_err());
        t.frames[2].t_capture_ms = 66;
        t.fps = 0.0;
        assert!(t.validate().is_err());
    }
}
