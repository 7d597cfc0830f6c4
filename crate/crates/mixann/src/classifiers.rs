//! Probabilistic binary classifiers with fit / incremental-update /
//! predict-probability: a pool-vote KNN and a small MLP trained with the
//! adaptive-moment optimizer.
//!
//! Both keep the full training pool so synthetic samples can be appended
//! mid-run; duplicated synthetics act as vote weighting rather than being
//! jittered apart. Snapshots are plain clones: a restored clone predicts
//! bit-identically to the original.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LabeledSample};
use crate::error::{Error, Result};
use crate::metrics::{self, MacroScores};
use crate::neighbors::NeighborIndex;
use crate::nn::{bce_with_logit, bce_with_logit_grad, sigmoid, Adam, Mlp};

/// Anything that predicts a minority probability and can absorb new samples.
pub trait Classifier {
    /// P(label = 1 | x).
    fn predict_proba(&self, x: &[f64]) -> Result<f64>;

    /// Folds freshly generated samples into the model.
    fn update(&mut self, new_samples: &[LabeledSample]) -> Result<()>;

    /// Size of the training pool backing the model.
    fn pool_len(&self) -> usize;
}

/// Probability thresholded at 0.5 (strictly above is minority).
pub fn predict_label<C: Classifier + ?Sized>(classifier: &C, x: &[f64]) -> Result<u8> {
    Ok(metrics::threshold_label(classifier.predict_proba(x)?))
}

/// Macro scores of thresholded predictions over a dataset.
pub fn evaluate<C: Classifier + ?Sized>(classifier: &C, data: &Dataset) -> Result<MacroScores> {
    let truth: Vec<u8> = data.labels().collect();
    let mut predictions = Vec::with_capacity(data.len());
    for sample in data.iter() {
        predictions.push(predict_label(classifier, &sample.features)?);
    }
    let cm = metrics::confusion(&truth, &predictions)?;
    metrics::macro_scores(&cm)
}

/// Which scalar an environment reads off the validation scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMetric {
    MacroF1,
    MacroPrecision,
    MacroRecall,
}

impl EvalMetric {
    pub fn pick(&self, scores: &MacroScores) -> f64 {
        match self {
            EvalMetric::MacroF1 => scores.f1,
            EvalMetric::MacroPrecision => scores.precision,
            EvalMetric::MacroRecall => scores.recall,
        }
    }
}

/// Scalar validation score under the chosen metric.
pub fn evaluate_metric<C: Classifier + ?Sized>(
    classifier: &C,
    data: &Dataset,
    metric: EvalMetric,
) -> Result<f64> {
    Ok(metric.pick(&evaluate(classifier, data)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    Mlp,
}

/// Hyperparameters for both classifier families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Vote size for the KNN classifier.
    pub knn_k: usize,
    /// Hidden layer widths for the MLP.
    pub mlp_hidden: Vec<usize>,
    pub mlp_learning_rate: f64,
    pub mlp_epochs_initial: usize,
    /// Gradient steps taken per incremental update.
    pub mlp_steps_per_update: usize,
    pub mlp_batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::Knn,
            knn_k: 10,
            mlp_hidden: vec![128, 64],
            mlp_learning_rate: 1e-3,
            mlp_epochs_initial: 100,
            mlp_steps_per_update: 20,
            mlp_batch_size: 32,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    pub fn knn(k: usize, seed: u64) -> Self {
        Self {
            kind: ClassifierKind::Knn,
            knn_k: k,
            seed,
            ..Self::default()
        }
    }

    pub fn mlp(hidden: Vec<usize>, seed: u64) -> Self {
        Self {
            kind: ClassifierKind::Mlp,
            mlp_hidden: hidden,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 {
            return Err(Error::InvalidConfig("knn_k must be at least 1".into()));
        }
        if self.mlp_hidden.is_empty() || self.mlp_hidden.contains(&0) {
            return Err(Error::InvalidConfig(
                "mlp_hidden must list positive widths".into(),
            ));
        }
        if self.mlp_learning_rate <= 0.0 || self.mlp_learning_rate.is_nan() {
            return Err(Error::InvalidConfig(
                "mlp_learning_rate must be positive".into(),
            ));
        }
        if self.mlp_epochs_initial == 0 || self.mlp_steps_per_update == 0 || self.mlp_batch_size == 0
        {
            return Err(Error::InvalidConfig(
                "mlp epoch, step, and batch counts must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

/// A fitted classifier of either family; clones are deep snapshots.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ClassifierState {
    Knn(KnnClassifier),
    Mlp(MlpClassifier),
}

impl ClassifierState {
    pub fn spec(&self) -> &ClassifierSpec {
        match self {
            ClassifierState::Knn(c) => &c.spec,
            ClassifierState::Mlp(c) => &c.spec,
        }
    }
}

impl Classifier for ClassifierState {
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        match self {
            ClassifierState::Knn(c) => c.predict_proba(x),
            ClassifierState::Mlp(c) => c.predict_proba(x),
        }
    }

    fn update(&mut self, new_samples: &[LabeledSample]) -> Result<()> {
        match self {
            ClassifierState::Knn(c) => c.update(new_samples),
            ClassifierState::Mlp(c) => c.update(new_samples),
        }
    }

    fn pool_len(&self) -> usize {
        match self {
            ClassifierState::Knn(c) => c.pool_len(),
            ClassifierState::Mlp(c) => c.pool_len(),
        }
    }
}

/// Trains a classifier of the requested kind on `train`.
pub fn fit(spec: &ClassifierSpec, train: &Dataset) -> Result<ClassifierState> {
    spec.validate()?;
    if !train.has_both_classes() {
        return Err(Error::SingleClassData);
    }
    Ok(match spec.kind {
        ClassifierKind::Knn => ClassifierState::Knn(KnnClassifier::fit(spec.clone(), train)?),
        ClassifierKind::Mlp => ClassifierState::Mlp(MlpClassifier::fit(spec.clone(), train)?),
    })
}

/// Nearest-neighbor vote over the training pool.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnClassifier {
    spec: ClassifierSpec,
    index: NeighborIndex,
}

impl KnnClassifier {
    fn fit(spec: ClassifierSpec, train: &Dataset) -> Result<Self> {
        Ok(Self {
            spec,
            index: NeighborIndex::from_dataset(train)?,
        })
    }
}

impl Classifier for KnnClassifier {
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let neighbors = self.index.k_nearest(x, self.spec.knn_k)?;
        let minority = neighbors
            .iter()
            .filter(|&&(i, _)| self.index.label(i) == 1)
            .count();
        Ok(minority as f64 / neighbors.len() as f64)
    }

    fn update(&mut self, new_samples: &[LabeledSample]) -> Result<()> {
        if new_samples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        for s in new_samples {
            self.index.append(s.features.clone(), s.label)?;
        }
        Ok(())
    }

    fn pool_len(&self) -> usize {
        self.index.len()
    }
}

/// Sigmoid-output MLP trained on binary cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    spec: ClassifierSpec,
    net: Mlp,
    optimizer: Adam,
    pool: Vec<LabeledSample>,
    rng: ChaCha8Rng,
}

impl MlpClassifier {
    fn fit(spec: ClassifierSpec, train: &Dataset) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut dims = vec![train.dim()];
        dims.extend_from_slice(&spec.mlp_hidden);
        dims.push(1);
        let net = Mlp::new(&dims, &mut rng);
        let optimizer = Adam::new(spec.mlp_learning_rate, net.params().len());
        let mut classifier = Self {
            spec,
            net,
            optimizer,
            pool: train.samples().to_vec(),
            rng,
        };
        for _ in 0..classifier.spec.mlp_epochs_initial {
            classifier.run_epoch()?;
        }
        Ok(classifier)
    }

    fn run_epoch(&mut self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.pool.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut self.rng);
        for batch in order.chunks(self.spec.mlp_batch_size) {
            self.gradient_step(batch)?;
        }
        Ok(())
    }

    /// One optimizer step on the mean BCE over the pool rows in `batch`.
    fn gradient_step(&mut self, batch: &[usize]) -> Result<()> {
        let mut grads = vec![0.0; self.net.params().len()];
        let scale = 1.0 / batch.len() as f64;
        for &i in batch {
            let sample = &self.pool[i];
            let cache = self.net.forward_cached(&sample.features)?;
            let g = bce_with_logit_grad(cache.output()[0], f64::from(sample.label)) * scale;
            self.net.backward(&cache, &[g], &mut grads)?;
        }
        self.optimizer.step(self.net.params_mut(), &grads)
    }

    /// Mean binary cross-entropy over a slice of samples.
    pub fn mean_bce(&self, samples: &[LabeledSample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut total = 0.0;
        for s in samples {
            total += bce_with_logit(self.net.forward(&s.features)?[0], f64::from(s.label));
        }
        Ok(total / samples.len() as f64)
    }

    pub fn pool(&self) -> &[LabeledSample] {
        &self.pool
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }
}

impl Classifier for MlpClassifier {
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.net.forward(x)?[0]))
    }

    fn update(&mut self, new_samples: &[LabeledSample]) -> Result<()> {
        if new_samples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let old_len = self.pool.len();
        for s in new_samples {
            if s.features.len() != self.net.input_dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.net.input_dim(),
                    got: s.features.len(),
                });
            }
            self.pool.push(s.clone());
        }
        // Warm-start steps: every batch carries all new samples, padded with
        // draws from the pre-existing pool up to the configured batch size.
        let fill = self.spec.mlp_batch_size.saturating_sub(new_samples.len());
        for _ in 0..self.spec.mlp_steps_per_update {
            let mut batch: Vec<usize> = (old_len..self.pool.len()).collect();
            if fill > 0 && old_len > 0 {
                if fill <= old_len {
                    let picks = rand::seq::index::sample(&mut self.rng, old_len, fill);
                    batch.extend(picks.iter());
                } else {
                    batch.extend((0..fill).map(|_| self.rng.random_range(0..old_len)));
                }
            }
            self.gradient_step(&batch)?;
        }
        Ok(())
    }

    fn pool_len(&self) -> usize {
        self.pool.len()
    }
}
