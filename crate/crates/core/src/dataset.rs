//! Labeled landmark datasets: the `landmark-jsonl` file format, a seeded
//! synthetic generator built on per-gesture prototype hands, and stratified splits.
//!
//! A `landmark-jsonl` file holds one JSON object per line:
//!
//! ```text
//! {"gesture": "peace", "landmarks": [[x, y, z], ... 21 triples], "source_id": "img_0001"}
//! ```
//!
//! `handedness` ("left" / "right" / "unknown") is optional. Blank lines are ignored.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classifier::LabeledFeatures;
use crate::gesture::{GestureClass, CLASS_ORDER};
use crate::skeleton::{normalize, HandSkeleton, Handedness, Landmark, SkeletonError, NUM_LANDMARKS};

const PROTOTYPES_JSON: &str = include_str!("../fixtures/prototypes.json");

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("sample {index}: {source}")]
    Skeleton { index: usize, source: SkeletonError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSample {
    pub skeleton: HandSkeleton,
    pub gesture: GestureClass,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkDataset {
    pub samples: Vec<LandmarkSample>,
    pub provenance: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRecord {
    gesture: String,
    landmarks: Vec<[f64; 3]>,
    source_id: String,
    #[serde(default, skip_serializing_if = "is_unknown")]
    handedness: Handedness,
}

fn is_unknown(h: &Handedness) -> bool {
    *h == Handedness::Unknown
}

/// Parses `landmark-jsonl` text. Errors carry 1-based line numbers.
pub fn parse_landmark_jsonl(text: &str) -> Result<Vec<LandmarkSample>, DatasetError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| DatasetError::Malformed { line, reason };
        let rec: JsonlRecord = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        let gesture: GestureClass = rec.gesture.parse().map_err(|e: crate::gesture::UnknownGesture| malformed(e.to_string()))?;
        if !gesture.is_gesture() {
            return Err(malformed("gesture must be one of the five classes".into()));
        }
        if rec.landmarks.len() != NUM_LANDMARKS {
            return Err(malformed(format!("expected {NUM_LANDMARKS} landmarks, got {}", rec.landmarks.len())));
        }
        let skeleton = HandSkeleton::from_triples(&rec.landmarks, rec.handedness).map_err(|e| malformed(e.to_string()))?;
        out.push(LandmarkSample { skeleton, gesture, source_id: rec.source_id });
    }
    Ok(out)
}

pub fn write_landmark_jsonl(samples: &[LandmarkSample]) -> String {
    let mut out = String::new();
    for s in samples {
        let rec = JsonlRecord {
            gesture: s.gesture.as_str().to_string(),
            landmarks: s.skeleton.to_triples(),
            source_id: s.source_id.clone(),
            handedness: s.skeleton.handedness,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn load_landmark_jsonl(path: &Path) -> Result<LandmarkDataset, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    Ok(LandmarkDataset {
        samples: parse_landmark_jsonl(&text)?,
        provenance: path.display().to_string(),
    })
}

/// The checked-in prototype hand for each gesture, in [`CLASS_ORDER`].
pub fn prototypes() -> Vec<(GestureClass, HandSkeleton)> {
    #[derive(Deserialize)]
    struct Proto {
        gesture: String,
        landmarks: Vec<[f64; 3]>,
    }
    let protos: Vec<Proto> = serde_json::from_str(PROTOTYPES_JSON).expect("prototype fixture is valid JSON");
    let mut out: Vec<(GestureClass, HandSkeleton)> = protos
        .into_iter()
        .map(|p| {
            let g = p.gesture.parse().expect("prototype gesture name");
            (g, HandSkeleton::from_triples(&p.landmarks, Handedness::Right).expect("prototype skeleton"))
        })
        .collect();
    out.sort_by_key(|(g, _)| *g);
    assert_eq!(out.iter().map(|(g, _)| *g).collect::<Vec<_>>(), CLASS_ORDER);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub per_class: usize,
    /// Per-coordinate Gaussian noise, in image-relative units.
    pub sigma: f64,
    pub scale_range: (f64, f64),
    pub translate: f64,
    /// Maximum in-plane rotation about the wrist, degrees.
    pub max_rotation_deg: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            per_class: 200,
            sigma: 0.004,
            scale_range: (0.6, 1.4),
            translate: 0.2,
            max_rotation_deg: 20.0,
        }
    }
}

/// Jitters a prototype: rotate about the wrist, scale, translate, then add noise.
pub fn jitter(proto: &HandSkeleton, params: &SyntheticParams, rng: &mut impl Rng) -> HandSkeleton {
    let noise = Normal::new(0.0, params.sigma.max(0.0)).expect("sigma is finite");
    let wrist = proto.landmarks()[0];
    let k = rng.gen_range(params.scale_range.0..=params.scale_range.1);
    let theta = rng.gen_range(-params.max_rotation_deg..=params.max_rotation_deg).to_radians();
    let (s, c) = theta.sin_cos();
    let tx = rng.gen_range(-params.translate..=params.translate);
    let ty = rng.gen_range(-params.translate..=params.translate);
    let mut pts = [Landmark::default(); NUM_LANDMARKS];
    for (p, l) in pts.iter_mut().zip(proto.landmarks()) {
        let (dx, dy, dz) = (l.x - wrist.x, l.y - wrist.y, l.z - wrist.z);
        let rx = c * dx - s * dy;
        let ry = s * dx + c * dy;
        *p = Landmark::new(
            wrist.x + k * rx + tx + noise.sample(rng),
            wrist.y + k * ry + ty + noise.sample(rng),
            wrist.z + k * dz + noise.sample(rng),
        );
    }
    HandSkeleton::new(pts, proto.handedness).expect("finite jitter")
}

/// `per_class` jittered copies of each prototype, class-major order.
pub fn synthetic(params: &SyntheticParams, seed: u64) -> LandmarkDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(params.per_class * CLASS_ORDER.len());
    for (g, proto) in prototypes() {
        let mut i = 0;
        while i < params.per_class {
            let skeleton = jitter(&proto, params, &mut rng);
            if normalize(&skeleton).is_err() {
                continue;
            }
            samples.push(LandmarkSample {
                skeleton,
                gesture: g,
                source_id: format!("synthetic-{seed}-{}-{i:05}", g.as_str()),
            });
            i += 1;
        }
    }
    LandmarkDataset { samples, provenance: format!("synthetic-seed-{seed}") }
}

/// Splits indices per class according to `fractions` (which should sum to 1).
/// Within each class indices are shuffled with `seed`; the last part takes the remainder.
pub fn stratified_indices(labels: impl IntoIterator<Item = GestureClass>, fractions: &[f64], seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); CLASS_ORDER.len() + 1];
    for (i, g) in labels.into_iter().enumerate() {
        by_class[g.index().unwrap_or(CLASS_ORDER.len())].push(i);
    }
    let mut parts = vec![Vec::new(); fractions.len()];
    for mut idx in by_class {
        idx.shuffle(&mut rng);
        let n = idx.len();
        let mut start = 0;
        let mut acc = 0.0;
        for (p, f) in fractions.iter().enumerate() {
            acc += f;
            let end = if p + 1 == fractions.len() { n } else { ((acc * n as f64).round() as usize).min(n) };
            let end = end.max(start);
            parts[p].extend_from_slice(&idx[start..end]);
            start = end;
        }
    }
    parts
}

impl LandmarkDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn classes(&self) -> HashSet<GestureClass> {
        self.samples.iter().map(|s| s.gesture).collect()
    }

    /// Normalized features for every sample; degenerate skeletons are an error.
    pub fn features(&self) -> Result<Vec<LabeledFeatures>, DatasetError> {
        self.samples
            .iter()
            .enumerate()
            .map(|(index, s)| {
                normalize(&s.skeleton)
                    .map(|features| LabeledFeatures { features, label: s.gesture })
                    .map_err(|source| DatasetError::Skeleton { index, source })
            })
            .collect()
    }
}
