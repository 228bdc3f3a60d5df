//! `HLMODEL1` binary model files.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! offset  size            field
//! 0       8               magic "HLMODEL1"
//! 8       4   u32         input dimension (63)
//! 12      4   u32         hidden units H
//! 16      4   u32         class count C (5)
//! 20      C   u8 each     class codes in output order (0 fist, 1 ok, 2 stop, 3 two_up, 4 peace)
//! ..      8*H*63  f64     hidden weights, row-major, one row per hidden unit
//! ..      8*H     f64     hidden biases
//! ..      8*C*H   f64     output weights, row-major, one row per class
//! ..      8*C     f64     output biases
//! ```
//!
//! Trailing bytes are rejected.

use crate::classifier::LandmarkClassifier;
use crate::gesture::{GestureClass, CLASS_ORDER, NUM_CLASSES};
use crate::skeleton::FEATURE_DIM;

pub const MAGIC: &[u8; 8] = b"HLMODEL1";
/// Upper bound on hidden units accepted when decoding.
pub const MAX_HIDDEN: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelFileError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("model file truncated")]
    Truncated,
    #[error("model file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("unsupported layout: {0}")]
    Layout(String),
    #[error("model weights are not finite")]
    NonFinite,
}

pub fn encode(model: &LandmarkClassifier) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + NUM_CLASSES + 8 * model.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(FEATURE_DIM as u32).to_le_bytes());
    out.extend_from_slice(&(model.hidden() as u32).to_le_bytes());
    out.extend_from_slice(&(NUM_CLASSES as u32).to_le_bytes());
    for g in CLASS_ORDER {
        out.push(g.index().expect("class order has no NoGesture") as u8);
    }
    for part in model.parts() {
        for v in part {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        if self.buf.len() < n {
            return Err(ModelFileError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, ModelFileError> {
        let bytes = self.take(n.checked_mul(8).ok_or(ModelFileError::Truncated)?)?;
        let v: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ModelFileError::NonFinite);
        }
        Ok(v)
    }
}

pub fn decode(bytes: &[u8]) -> Result<LandmarkClassifier, ModelFileError> {
    let mut r = Reader { buf: bytes };
    if r.take(MAGIC.len()).map_err(|_| ModelFileError::BadMagic)? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let input = r.u32()? as usize;
    let hidden = r.u32()? as usize;
    let classes = r.u32()? as usize;
    if input != FEATURE_DIM {
        return Err(ModelFileError::Layout(format!("input dimension {input}, expected {FEATURE_DIM}")));
    }
    if classes != NUM_CLASSES {
        return Err(ModelFileError::Layout(format!("{classes} classes, expected {NUM_CLASSES}")));
    }
    if hidden == 0 || hidden > MAX_HIDDEN {
        return Err(ModelFileError::Layout(format!("hidden size {hidden} outside 1..={MAX_HIDDEN}")));
    }
    let codes = r.take(classes)?;
    let order: Vec<Option<GestureClass>> = codes.iter().map(|&c| GestureClass::from_index(c as usize)).collect();
    if order.iter().copied().ne(CLASS_ORDER.iter().copied().map(Some)) {
        return Err(ModelFileError::Layout(format!("class order {codes:?} is not the canonical order")));
    }
    let w1 = r.f64s(hidden * FEATURE_DIM)?;
    let b1 = r.f64s(hidden)?;
    let w2 = r.f64s(NUM_CLASSES * hidden)?;
    let b2 = r.f64s(NUM_CLASSES)?;
    if !r.buf.is_empty() {
        return Err(ModelFileError::TrailingBytes(r.buf.len()));
    }
    LandmarkClassifier::from_parts(hidden, w1, b1, w2, b2).map_err(|e| ModelFileError::Layout(e.to_string()))
}
