//! One-hidden-layer landmark classifier: 63 -> H (ReLU) -> 5 (softmax).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gesture::{GestureClass, NUM_CLASSES};
use crate::skeleton::{NormalizedFeatures, FEATURE_DIM};

pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("loss became non-finite at epoch {epoch}; the learning rate is probably too large")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("sample {0} has no gesture label (NoGesture is not a trainable class)")]
    UnlabeledSample(usize),
}

/// Dense parameters. Matrices are row-major with one row per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkClassifier {
    hidden: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

/// Gradient of the per-sample loss, laid out like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros(hidden: usize) -> Self {
        Gradients {
            w1: vec![0.0; hidden * FEATURE_DIM],
            b1: vec![0.0; hidden],
            w2: vec![0.0; NUM_CLASSES * hidden],
            b2: vec![0.0; NUM_CLASSES],
        }
    }

    fn clear(&mut self) {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }
}

impl LandmarkClassifier {
    pub fn zeros(hidden: usize) -> Self {
        LandmarkClassifier {
            hidden,
            w1: vec![0.0; hidden * FEATURE_DIM],
            b1: vec![0.0; hidden],
            w2: vec![0.0; NUM_CLASSES * hidden],
            b2: vec![0.0; NUM_CLASSES],
        }
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(hidden: usize, rng: &mut impl Rng) -> Self {
        let mut m = Self::zeros(hidden);
        let a1 = (6.0 / (FEATURE_DIM + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + NUM_CLASSES) as f64).sqrt();
        m.w1.iter_mut().for_each(|w| *w = rng.gen_range(-a1..=a1));
        m.w2.iter_mut().for_each(|w| *w = rng.gen_range(-a2..=a2));
        m
    }

    pub fn from_parts(hidden: usize, w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>, b2: Vec<f64>) -> Result<Self, ClassifierError> {
        let m = LandmarkClassifier { hidden, w1, b1, w2, b2 };
        m.check_shapes()?;
        Ok(m)
    }

    fn check_shapes(&self) -> Result<(), ClassifierError> {
        let h = self.hidden;
        let expect = [
            ("w1", self.w1.len(), h * FEATURE_DIM),
            ("b1", self.b1.len(), h),
            ("w2", self.w2.len(), NUM_CLASSES * h),
            ("b2", self.b2.len(), NUM_CLASSES),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(ClassifierError::ShapeMismatch(format!("{name} has {got} values, expected {want}")));
            }
        }
        if h == 0 {
            return Err(ClassifierError::ShapeMismatch("hidden layer is empty".into()));
        }
        Ok(())
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn params(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2] {
            if i < v.len() {
                return &mut v[i];
            }
            i -= v.len();
        }
        &mut self.b2[i]
    }

    pub(crate) fn parts(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * FEATURE_DIM..(j + 1) * FEATURE_DIM];
                let a = self.b1[j] + dot(row, x);
                a.max(0.0)
            })
            .collect()
    }

    fn output_logits(&self, h: &[f64]) -> [f64; NUM_CLASSES] {
        let mut z = [0.0; NUM_CLASSES];
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = self.b2[k] + dot(&self.w2[k * self.hidden..(k + 1) * self.hidden], h);
        }
        z
    }

    pub fn logits(&self, x: &[f64]) -> Result<[f64; NUM_CLASSES], ClassifierError> {
        self.check_shapes()?;
        if x.len() != FEATURE_DIM {
            return Err(ClassifierError::ShapeMismatch(format!(
                "feature vector has {} values, expected {FEATURE_DIM}",
                x.len()
            )));
        }
        Ok(self.output_logits(&self.hidden_activations(x)))
    }

    /// Class probabilities in [`crate::gesture::CLASS_ORDER`].
    pub fn predict(&self, features: &NormalizedFeatures) -> [f64; NUM_CLASSES] {
        softmax(&self.output_logits(&self.hidden_activations(features.as_slice())))
    }

    pub fn predict_slice(&self, x: &[f64]) -> Result<[f64; NUM_CLASSES], ClassifierError> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Most probable class; ties go to the lowest class index.
    pub fn classify(&self, features: &NormalizedFeatures) -> (GestureClass, f64) {
        let p = self.predict(features);
        let k = argmax(&p);
        (GestureClass::from_index(k).expect("index < NUM_CLASSES"), p[k])
    }

    /// Cross-entropy `-ln p[label]` and its gradient for one sample.
    pub fn loss_and_gradient(&self, x: &[f64], label: usize) -> (f64, Gradients) {
        let mut g = Gradients::zeros(self.hidden);
        let loss = self.accumulate_gradient(x, label, 1.0, &mut g);
        (loss, g)
    }

    pub fn loss(&self, x: &[f64], label: usize) -> f64 {
        cross_entropy(&self.output_logits(&self.hidden_activations(x)), label)
    }

    /// Adds `scale * dL/dθ` into `g`, returns the loss.
    #[allow(clippy::needless_range_loop)]
    fn accumulate_gradient(&self, x: &[f64], label: usize, scale: f64, g: &mut Gradients) -> f64 {
        let h = self.hidden_activations(x);
        let z = self.output_logits(&h);
        let p = softmax(&z);
        let loss = cross_entropy(&z, label);

        let mut dz = p;
        dz[label] -= 1.0;
        let mut dh = vec![0.0; self.hidden];
        for k in 0..NUM_CLASSES {
            let d = dz[k] * scale;
            g.b2[k] += d;
            let row = k * self.hidden;
            for j in 0..self.hidden {
                g.w2[row + j] += d * h[j];
                dh[j] += dz[k] * self.w2[row + j];
            }
        }
        for j in 0..self.hidden {
            if h[j] <= 0.0 {
                continue;
            }
            let d = dh[j] * scale;
            g.b1[j] += d;
            let row = j * FEATURE_DIM;
            for (gw, &xi) in g.w1[row..row + FEATURE_DIM].iter_mut().zip(x) {
                *gw += d * xi;
            }
        }
        loss
    }

    fn sgd_step(&mut self, g: &Gradients, lr: f64) {
        for (p, d) in self
            .w1
            .iter_mut()
            .zip(&g.w1)
            .chain(self.b1.iter_mut().zip(&g.b1))
            .chain(self.w2.iter_mut().zip(&g.w2))
            .chain(self.b2.iter_mut().zip(&g.b2))
        {
            *p -= lr * d;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn softmax(z: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut e = [0.0; NUM_CLASSES];
    let mut sum = 0.0;
    for (ek, zk) in e.iter_mut().zip(z) {
        *ek = (zk - m).exp();
        sum += *ek;
    }
    e.iter_mut().for_each(|v| *v /= sum);
    e
}

fn cross_entropy(z: &[f64; NUM_CLASSES], label: usize) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    lse - z[label]
}

/// Index of the largest value; first index wins ties.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Safety cap; early stopping normally ends training first.
    pub max_epochs: usize,
    /// Epochs without validation-loss improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub hidden: usize,
    pub optimizer: Optimizer,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            batch_size: 64,
            learning_rate: 1e-3,
            max_epochs: 1000,
            patience: 5,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.batch_size < 1 {
            return Err(ClassifierError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ClassifierError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.patience < 1 {
            return Err(ClassifierError::InvalidConfig("patience must be >= 1".into()));
        }
        if self.hidden < 1 {
            return Err(ClassifierError::InvalidConfig("hidden must be >= 1".into()));
        }
        Ok(())
    }
}

/// One feature row with its gesture label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatures {
    pub features: NormalizedFeatures,
    pub label: GestureClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutcome {
    /// Weights from the epoch with the lowest validation loss.
    pub model: LandmarkClassifier,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

fn label_indices(data: &[LabeledFeatures]) -> Result<Vec<usize>, ClassifierError> {
    data.iter()
        .enumerate()
        .map(|(i, s)| s.label.index().ok_or(ClassifierError::UnlabeledSample(i)))
        .collect()
}

fn mean_loss(model: &LandmarkClassifier, data: &[LabeledFeatures], labels: &[usize]) -> f64 {
    let total: f64 = data.iter().zip(labels).map(|(s, &y)| model.loss(s.features.as_slice(), y)).sum();
    total / data.len() as f64
}

/// Mini-batch gradient descent on mean cross-entropy with early stopping on
/// validation loss. If `val` is empty the training loss is monitored instead.
pub fn train(
    train: &[LabeledFeatures],
    val: &[LabeledFeatures],
    config: &TrainingConfig,
) -> Result<TrainingOutcome, ClassifierError> {
    config.validate()?;
    let train_labels = label_indices(train)?;
    let val_labels = label_indices(val)?;
    let mut distinct = train_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(ClassifierError::InsufficientData(format!(
            "training split has {} distinct label(s), need at least 2",
            distinct.len()
        )));
    }
    if let Some(i) = train.iter().chain(val).position(|s| s.features.0.iter().any(|v| !v.is_finite())) {
        return Err(ClassifierError::ShapeMismatch(format!("sample {i} has non-finite features")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LandmarkClassifier::init(config.hidden, &mut rng);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = Gradients::zeros(config.hidden);

    let mut history = Vec::new();
    let mut best = (f64::INFINITY, model.clone(), 0usize);
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                epoch_loss += model.accumulate_gradient(train[i].features.as_slice(), train_labels[i], scale, &mut grad);
            }
            match config.optimizer {
                Optimizer::Sgd => model.sgd_step(&grad, config.learning_rate),
            }
        }
        let train_loss = epoch_loss / train.len() as f64;
        let val_loss = if val.is_empty() {
            mean_loss(&model, train, &train_labels)
        } else {
            mean_loss(&model, val, &val_labels)
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(ClassifierError::NonFiniteLoss { epoch });
        }
        history.push(EpochStats { epoch, train_loss, val_loss });

        if val_loss < best.0 {
            best = (val_loss, model.clone(), epoch);
        } else if epoch - best.2 >= config.patience {
            stopped_early = true;
            break;
        }
    }

    let (_, model, best_epoch) = best;
    Ok(TrainingOutcome { model, history, best_epoch, stopped_early })
}

/// Seeded stratified split into `(train, val)` with `val_fraction` of each class held out.
pub fn stratified_split(
    data: &[LabeledFeatures],
    val_fraction: f64,
    seed: u64,
) -> (Vec<LabeledFeatures>, Vec<LabeledFeatures>) {
    let parts = crate::dataset::stratified_indices(
        data.iter().map(|s| s.label),
        &[1.0 - val_fraction, val_fraction],
        seed,
    );
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<_>>();
    (pick(&parts[0]), pick(&parts[1]))
}

/// Max relative error between backprop and central-difference gradients
/// over every parameter, for a single sample.
pub fn gradient_check(
    model: &LandmarkClassifier,
    features: &NormalizedFeatures,
    label: GestureClass,
    epsilon: f64,
) -> Result<f64, ClassifierError> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(ClassifierError::InvalidConfig(format!("epsilon must be in (0, 1e-2], got {epsilon}")));
    }
    model.check_shapes()?;
    let y = label.index().ok_or(ClassifierError::UnlabeledSample(0))?;
    let x = features.as_slice();
    let analytic = model.loss_and_gradient(x, y).1.flatten();

    let mut up = model.clone();
    let mut down = model.clone();
    let mut worst = 0.0f64;
    for (i, &ga) in analytic.iter().enumerate() {
        let orig = *up.param_mut(i);
        *up.param_mut(i) = orig + epsilon;
        *down.param_mut(i) = orig - epsilon;
        let step = (orig + epsilon) - (orig - epsilon);
        let gn = loss_difference(&up, &down, x, y) / step;
        *up.param_mut(i) = orig;
        *down.param_mut(i) = orig;
        let rel = (ga - gn).abs() / ga.abs().max(gn.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// `loss(a) - loss(b)` for two models of the same shape.
///
/// Subtracting two separately rounded losses leaves an absolute error near
/// 1e-16 * loss, which swamps central differences of tiny gradients. Here
/// the difference is carried through each layer instead (pre-activations,
/// ReLU outputs, logits, then `ln(1 + sum p_b * expm1(dz)) - dz[y]`), so
/// the result keeps its relative precision.
fn loss_difference(a: &LandmarkClassifier, b: &LandmarkClassifier, x: &[f64], y: usize) -> f64 {
    let hidden = a.hidden;
    let mut ha = vec![0.0; hidden];
    let mut hb = vec![0.0; hidden];
    let mut dh = vec![0.0; hidden];
    for j in 0..hidden {
        let r = j * FEATURE_DIM..(j + 1) * FEATURE_DIM;
        let pb = b.b1[j] + dot(&b.w1[r.clone()], x);
        let (pa, dpre) = if a.b1[j] == b.b1[j] && a.w1[r.clone()] == b.w1[r.clone()] {
            (pb, 0.0)
        } else {
            let d = a.w1[r.clone()].iter().zip(&b.w1[r.clone()]).zip(x).map(|((wa, wb), xi)| (wa - wb) * xi).sum::<f64>();
            (a.b1[j] + dot(&a.w1[r], x), (a.b1[j] - b.b1[j]) + d)
        };
        ha[j] = pa.max(0.0);
        hb[j] = pb.max(0.0);
        dh[j] = match (pa > 0.0, pb > 0.0) {
            (true, true) => dpre,
            (false, false) => 0.0,
            _ => ha[j] - hb[j],
        };
    }
    let zb = b.output_logits(&hb);
    let mut dz = [0.0; NUM_CLASSES];
    for (k, d) in dz.iter_mut().enumerate() {
        let r = k * hidden..(k + 1) * hidden;
        *d = (a.b2[k] - b.b2[k]) + b.w2[r.clone()].iter().zip(&dh).map(|(w, d)| w * d).sum::<f64>();
        if a.w2[r.clone()] != b.w2[r.clone()] {
            *d += a.w2[r.clone()].iter().zip(&b.w2[r]).zip(&ha).map(|((wa, wb), h)| (wa - wb) * h).sum::<f64>();
        }
    }
    let p = softmax(&zb);
    let growth: f64 = p.iter().zip(&dz).map(|(pk, d)| pk * d.exp_m1()).sum();
    growth.ln_1p() - dz[y]
}
