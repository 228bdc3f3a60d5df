use serde::{Deserialize, Serialize};

use crate::classifier::{LabeledFeatures, LandmarkClassifier};
use crate::gesture::{GestureClass, CLASS_ORDER, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot evaluate an empty dataset")]
    EmptyDataset,
    #[error("sample {0} is labeled NoGesture")]
    UnlabeledSample(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub class_order: Vec<GestureClass>,
    pub per_class_precision: [f64; NUM_CLASSES],
    pub per_class_recall: [f64; NUM_CLASSES],
    pub per_class_f1: [f64; NUM_CLASSES],
    /// Unweighted mean F1 over classes seen in either labels or predictions.
    pub macro_f1: f64,
    pub averaging: String,
    /// Rows are true classes, columns predicted.
    pub confusion: [[u64; NUM_CLASSES]; NUM_CLASSES],
    pub n_samples: u64,
}

impl EvaluationReport {
    pub fn accuracy(&self) -> f64 {
        let diag: u64 = (0..NUM_CLASSES).map(|i| self.confusion[i][i]).sum();
        diag as f64 / self.n_samples as f64
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision/recall/F1 from paired class indices. A zero denominator yields 0.
pub fn report_from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<EvaluationReport, EvalError> {
    let mut confusion = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    let mut n = 0u64;
    for (t, p) in pairs {
        confusion[t][p] += 1;
        n += 1;
    }
    if n == 0 {
        return Err(EvalError::EmptyDataset);
    }

    let mut precision = [0.0; NUM_CLASSES];
    let mut recall = [0.0; NUM_CLASSES];
    let mut f1 = [0.0; NUM_CLASSES];
    let mut present = 0usize;
    let mut f1_sum = 0.0;
    for c in 0..NUM_CLASSES {
        let tp = confusion[c][c];
        let predicted: u64 = (0..NUM_CLASSES).map(|r| confusion[r][c]).sum();
        let actual: u64 = confusion[c].iter().sum();
        precision[c] = ratio(tp, predicted);
        recall[c] = ratio(tp, actual);
        f1[c] = if precision[c] + recall[c] == 0.0 {
            0.0
        } else {
            2.0 * precision[c] * recall[c] / (precision[c] + recall[c])
        };
        if predicted + actual > 0 {
            present += 1;
            f1_sum += f1[c];
        }
    }

    Ok(EvaluationReport {
        class_order: CLASS_ORDER.to_vec(),
        per_class_precision: precision,
        per_class_recall: recall,
        per_class_f1: f1,
        macro_f1: f1_sum / present as f64,
        averaging: "macro".to_string(),
        confusion,
        n_samples: n,
    })
}

/// Hard predictions by argmax (lowest index wins ties), scored against labels.
pub fn evaluate(model: &LandmarkClassifier, data: &[LabeledFeatures]) -> Result<EvaluationReport, EvalError> {
    let mut pairs = Vec::with_capacity(data.len());
    for (i, s) in data.iter().enumerate() {
        let t = s.label.index().ok_or(EvalError::UnlabeledSample(i))?;
        let (g, _) = model.classify(&s.features);
        pairs.push((t, g.index().expect("classifier never predicts NoGesture")));
    }
    report_from_pairs(pairs)
}
