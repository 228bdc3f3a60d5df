//! Train/validation/test split, training and held-out evaluation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use gesturelog_core::classifier::{train, ClassifierError, EpochStats, LabeledFeatures};
use gesturelog_core::dataset::{stratified_indices, LandmarkDataset};
use gesturelog_core::metrics::{evaluate, EvaluationReport};
use gesturelog_core::{model_file, LandmarkClassifier, TrainingConfig};

use crate::ToolError;

pub const SPLIT_FRACTIONS: [f64; 3] = [0.70, 0.15, 0.15];

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<LabeledFeatures>,
    pub val: Vec<LabeledFeatures>,
    pub test: Vec<LabeledFeatures>,
}

/// Stratified, seeded 70/15/15 split.
pub fn split_dataset(features: &[LabeledFeatures], seed: u64) -> Split {
    let parts = stratified_indices(features.iter().map(|f| f.label), &SPLIT_FRACTIONS, seed);
    let pick = |idx: &[usize]| idx.iter().map(|&i| features[i].clone()).collect::<Vec<_>>();
    Split { train: pick(&parts[0]), val: pick(&parts[1]), test: pick(&parts[2]) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainEvalReport {
    pub provenance: String,
    pub split_seed: u64,
    pub split: SplitSizes,
    pub training: TrainingConfig,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub history: Vec<EpochStats>,
    pub test: EvaluationReport,
}

impl TrainEvalReport {
    /// Pretty JSON with a trailing newline; identical inputs give identical bytes.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("report serializes");
        v.push(b'\n');
        v
    }
}

#[derive(Debug, Clone)]
pub struct TrainEvalOutput {
    pub model: LandmarkClassifier,
    pub report: TrainEvalReport,
}

pub fn train_eval(ds: &LandmarkDataset, split_seed: u64, config: &TrainingConfig) -> Result<TrainEvalOutput, ToolError> {
    let classes = ds.classes();
    if classes.len() < 2 {
        return Err(ClassifierError::InsufficientData(format!("dataset has {} class(es), need at least 2", classes.len())).into());
    }
    let features = ds.features()?;
    let split = split_dataset(&features, split_seed);
    if split.test.is_empty() {
        return Err(ClassifierError::InsufficientData("test split is empty".into()).into());
    }
    let outcome = train(&split.train, &split.val, config)?;
    let test = evaluate(&outcome.model, &split.test)?;
    let report = TrainEvalReport {
        provenance: ds.provenance.clone(),
        split_seed,
        split: SplitSizes { train: split.train.len(), val: split.val.len(), test: split.test.len() },
        training: config.clone(),
        best_epoch: outcome.best_epoch,
        stopped_early: outcome.stopped_early,
        history: outcome.history,
        test,
    };
    Ok(TrainEvalOutput { model: outcome.model, report })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ToolError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| ToolError::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, bytes).map_err(|e| ToolError::io(format!("writing {}", path.display()), e))
}

pub fn load_model(path: &Path) -> Result<LandmarkClassifier, ToolError> {
    let bytes = std::fs::read(path).map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
    Ok(model_file::decode(&bytes)?)
}
