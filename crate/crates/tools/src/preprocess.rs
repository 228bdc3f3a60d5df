//! Batch rasterization of a landmark dataset to PNG files.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use gesturelog_core::dataset::LandmarkDataset;
use gesturelog_core::raster::{encode_png, rasterize, RasterSpec};
use gesturelog_core::GestureClass;

use crate::ToolError;

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source_id: String,
    pub gesture: GestureClass,
    /// File name relative to the output directory.
    pub path: String,
}

/// Replaces anything outside `[A-Za-z0-9._-]` so a source id is a safe file stem.
pub fn file_stem(source_id: &str) -> String {
    source_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

/// Writes `<source_id>_<style>.png` per sample plus `manifest.csv`, both in
/// source-id order. Output bytes depend only on the inputs.
pub fn preprocess_batch(ds: &LandmarkDataset, spec: &RasterSpec, out_dir: &Path) -> Result<Vec<ManifestEntry>, ToolError> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| ToolError::io(format!("creating {}", out_dir.display()), e))?;

    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| ds.samples[a].source_id.cmp(&ds.samples[b].source_id));

    let mut seen = HashSet::new();
    let mut manifest = Vec::with_capacity(order.len());
    for i in order {
        let s = &ds.samples[i];
        let name = format!("{}_{}.png", file_stem(&s.source_id), spec.style.as_str());
        if !seen.insert(name.clone()) {
            return Err(ToolError::invalid(format!("source id {:?} collides with another sample as {name}", s.source_id)));
        }
        let png = encode_png(&rasterize(&s.skeleton, spec)?);
        let path = out_dir.join(&name);
        std::fs::write(&path, png).map_err(|e| ToolError::io(format!("writing {}", path.display()), e))?;
        manifest.push(ManifestEntry { source_id: s.source_id.clone(), gesture: s.gesture, path: name });
    }

    if !manifest.is_empty() {
        let path = out_dir.join(MANIFEST_FILE);
        std::fs::write(&path, write_manifest(&manifest)).map_err(|e| ToolError::io(format!("writing {}", path.display()), e))?;
    }
    Ok(manifest)
}

pub fn write_manifest(entries: &[ManifestEntry]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for e in entries {
        w.serialize(e).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn read_manifest(bytes: &[u8]) -> Result<Vec<ManifestEntry>, ToolError> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| ToolError::invalid(format!("manifest: {e}")))
}
