//! Hand skeleton representation and landmark normalization.
//!
//! Landmark indices follow the standard 21-point hand topology: 0 is the wrist,
//! then four joints per finger from thumb (1-4) to pinky (17-20), base to tip.

use serde::{Deserialize, Serialize};

pub const NUM_LANDMARKS: usize = 21;
pub const FEATURE_DIM: usize = NUM_LANDMARKS * 3;

pub const WRIST: usize = 0;
pub const MIDDLE_MCP: usize = 9;

/// Wrist to middle-MCP distances below this are treated as tracking glitches.
pub const MIN_REFERENCE_LENGTH: f64 = 1e-6;

/// The 21 bone connections of the hand graph.
pub const EDGES: [(usize, usize); 21] = [
    // thumb
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    // index
    (0, 5),
    (5, 6),
    (6, 7),
    (7, 8),
    // middle
    (5, 9),
    (9, 10),
    (10, 11),
    (11, 12),
    // ring
    (9, 13),
    (13, 14),
    (14, 15),
    (15, 16),
    // pinky
    (13, 17),
    (17, 18),
    (18, 19),
    (19, 20),
    // palm closure
    (0, 17),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SkeletonError {
    #[error("expected {NUM_LANDMARKS} landmarks, got {0}")]
    WrongLandmarkCount(usize),
    #[error("landmark {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("degenerate skeleton: wrist and middle-finger MCP coincide (item {index:?})")]
    DegenerateSkeleton { index: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Landmark {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Landmark { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Landmark {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Landmark { x, y, z }
    }
}

impl From<Landmark> for [f64; 3] {
    fn from(l: Landmark) -> Self {
        [l.x, l.y, l.z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
    #[default]
    Unknown,
}

/// One detected hand: exactly 21 finite landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct HandSkeleton {
    landmarks: [Landmark; NUM_LANDMARKS],
    pub handedness: Handedness,
}

impl HandSkeleton {
    pub fn new(landmarks: [Landmark; NUM_LANDMARKS], handedness: Handedness) -> Result<Self, SkeletonError> {
        if let Some(index) = landmarks.iter().position(|l| !l.is_finite()) {
            return Err(SkeletonError::NonFinite { index });
        }
        Ok(HandSkeleton { landmarks, handedness })
    }

    pub fn from_slice(points: &[Landmark], handedness: Handedness) -> Result<Self, SkeletonError> {
        let landmarks: [Landmark; NUM_LANDMARKS] = points
            .try_into()
            .map_err(|_| SkeletonError::WrongLandmarkCount(points.len()))?;
        Self::new(landmarks, handedness)
    }

    pub fn from_triples(points: &[[f64; 3]], handedness: Handedness) -> Result<Self, SkeletonError> {
        let pts: Vec<Landmark> = points.iter().copied().map(Landmark::from).collect();
        Self::from_slice(&pts, handedness)
    }

    pub fn landmarks(&self) -> &[Landmark; NUM_LANDMARKS] {
        &self.landmarks
    }

    pub fn to_triples(&self) -> Vec<[f64; 3]> {
        self.landmarks.iter().map(|&l| l.into()).collect()
    }

    /// Applies `f` to every landmark, re-validating finiteness.
    pub fn map(&self, mut f: impl FnMut(Landmark) -> Landmark) -> Result<Self, SkeletonError> {
        let mut out = self.landmarks;
        for l in out.iter_mut() {
            *l = f(*l);
        }
        Self::new(out, self.handedness)
    }
}

/// 63-element feature vector: `(x, y, z)` per landmark after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFeatures(pub [f64; FEATURE_DIM]);

impl NormalizedFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn landmark(&self, i: usize) -> [f64; 3] {
        [self.0[3 * i], self.0[3 * i + 1], self.0[3 * i + 2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    /// Rotate in the image plane so the wrist to middle-MCP direction points to -y.
    pub rotate: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { rotate: true }
    }
}

pub fn normalize(skeleton: &HandSkeleton) -> Result<NormalizedFeatures, SkeletonError> {
    normalize_with(skeleton, NormalizeOptions::default())
}

/// Translate the wrist to the origin, divide by the wrist to middle-MCP
/// distance, then (optionally) rotate x/y so that bone points along -y.
/// z is scaled but never rotated.
pub fn normalize_with(skeleton: &HandSkeleton, opts: NormalizeOptions) -> Result<NormalizedFeatures, SkeletonError> {
    let lm = skeleton.landmarks();
    let origin = lm[WRIST];
    let rx = lm[MIDDLE_MCP].x - origin.x;
    let ry = lm[MIDDLE_MCP].y - origin.y;
    let rz = lm[MIDDLE_MCP].z - origin.z;
    let len = (rx * rx + ry * ry + rz * rz).sqrt();
    if len.is_nan() || len < MIN_REFERENCE_LENGTH {
        return Err(SkeletonError::DegenerateSkeleton { index: None });
    }

    // Rotation taking the unit planar direction u to (0, -1): cos = -u.y, sin = -u.x.
    let planar = (rx * rx + ry * ry).sqrt();
    let (cos, sin) = if opts.rotate && planar > 0.0 {
        (-ry / planar, -rx / planar)
    } else {
        (1.0, 0.0)
    };

    let mut out = [0.0; FEATURE_DIM];
    for (i, l) in lm.iter().enumerate() {
        let x = (l.x - origin.x) / len;
        let y = (l.y - origin.y) / len;
        let z = (l.z - origin.z) / len;
        out[3 * i] = cos * x - sin * y;
        out[3 * i + 1] = sin * x + cos * y;
        out[3 * i + 2] = z;
    }
    Ok(NormalizedFeatures(out))
}

/// Normalizes every skeleton; rows keep input order.
pub fn featurize_batch(skeletons: &[HandSkeleton]) -> Result<Vec<NormalizedFeatures>, SkeletonError> {
    skeletons
        .iter()
        .enumerate()
        .map(|(i, s)| normalize(s).map_err(|_| SkeletonError::DegenerateSkeleton { index: Some(i) }))
        .collect()
}
