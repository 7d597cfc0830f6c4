//! Dataset representation, CSV ingestion, stratified splitting, and a
//! 2-D toy-dataset generator for hermetic experiments.
//!
//! Labels are binary: `0` is the majority (normal) class, `1` the minority
//! (anomaly) class. A [`Dataset`] is immutable after construction; consumers
//! that need an augmented pool build a new one with [`Dataset::augmented`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAJORITY: u8 = 0;
pub const MINORITY: u8 = 1;

/// One feature vector with its binary class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: u8,
}

impl LabeledSample {
    /// Validates that all features are finite and the label is 0 or 1.
    pub fn new(features: Vec<f64>, label: u8) -> Result<Self> {
        if label != MAJORITY && label != MINORITY {
            return Err(Error::Label {
                row: 0,
                value: label.to_string(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "sample features must be finite".into(),
            ));
        }
        Ok(Self { features, label })
    }
}

/// An ordered, immutable collection of samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset, checking that every sample has the same dimension.
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        let dim = samples.first().map_or(0, |s| s.features.len());
        for s in &samples {
            if s.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.features.len(),
                });
            }
        }
        Ok(Self { samples, dim })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSample> {
        self.samples.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.samples.iter().map(|s| s.label)
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }

    /// Indices of all samples carrying `label`, in row order.
    pub fn indices_with_label(&self, label: u8) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.samples[i].label == label)
            .collect()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count_label(MINORITY) > 0 && self.count_label(MAJORITY) > 0
    }

    /// New dataset from a subset of row indices, preserving the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            dim: self.dim,
        }
    }

    /// New dataset holding this one's rows followed by `extra`.
    pub fn augmented(&self, extra: &[LabeledSample]) -> Result<Dataset> {
        for s in extra {
            if s.features.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: s.features.len(),
                });
            }
        }
        let mut samples = self.samples.clone();
        samples.extend_from_slice(extra);
        Ok(Dataset {
            samples,
            dim: self.dim,
        })
    }

    /// Per-dimension (min, max) over all samples.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for s in &self.samples {
            for (b, &v) in bounds.iter_mut().zip(&s.features) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        bounds
    }
}

/// How to carve a dataset into train / validation / test partitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of all rows that go to the test partition, in (0, 1).
    pub test_fraction: f64,
    /// Fraction of the remaining (train) rows that go to validation, in (0, 1).
    pub val_fraction_of_train: f64,
    /// Preserve per-class proportions within one sample per partition.
    pub stratified: bool,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("test_fraction", self.test_fraction),
            ("val_fraction_of_train", self.val_fraction_of_train),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1), got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Rounds half away from zero, the sizing rule for partitions.
pub(crate) fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Splits counts proportionally so they sum to `total` exactly, assigning
/// leftover units by largest fractional remainder (ties to the lower index).
pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        let mut out = vec![total / weights.len().max(1); weights.len()];
        let mut leftover = total - out.iter().sum::<usize>();
        for slot in out.iter_mut() {
            if leftover == 0 {
                break;
            }
            *slot += 1;
            leftover -= 1;
        }
        return out;
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Partitions `dataset` into (train, val, test).
///
/// Test size is `round(test_fraction * N)`; validation size is
/// `round(val_fraction_of_train * (N - |test|))`; the remainder is train
/// (rounding half away from zero). Stratified splits keep each class within
/// one sample of its exact proportional share per partition and fail with
/// [`Error::InsufficientClassSamples`] when a class would vanish from any
/// partition.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidConfig("cannot split an empty dataset".into()));
    }
    let n_test = round_half_away(spec.test_fraction * n as f64) as usize;
    let n_rest = n - n_test;
    let n_val = round_half_away(spec.val_fraction_of_train * n_rest as f64) as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut test_idx, mut val_idx, mut train_idx) = if spec.stratified {
        let mut test_idx = Vec::new();
        let mut val_idx = Vec::new();
        let mut train_idx = Vec::new();
        let class_indices: Vec<Vec<usize>> = [MAJORITY, MINORITY]
            .iter()
            .map(|&c| dataset.indices_with_label(c))
            .collect();
        for (c, idx) in class_indices.iter().enumerate() {
            if !idx.is_empty() && idx.len() < 3 {
                return Err(Error::InsufficientClassSamples { label: c as u8 });
            }
        }
        let class_sizes: Vec<f64> = class_indices.iter().map(|v| v.len() as f64).collect();
        let test_quota = largest_remainder(&class_sizes, n_test);
        let rest_sizes: Vec<f64> = class_sizes
            .iter()
            .zip(&test_quota)
            .map(|(&s, &t)| s - t as f64)
            .collect();
        let val_quota = largest_remainder(&rest_sizes, n_val);
        for (c, indices) in class_indices.iter().enumerate() {
            if indices.is_empty() {
                continue;
            }
            let t = test_quota[c];
            let v = val_quota[c];
            if t == 0 || v == 0 || indices.len() < t + v + 1 {
                return Err(Error::InsufficientClassSamples { label: c as u8 });
            }
            let mut shuffled = indices.clone();
            shuffled.shuffle(&mut rng);
            test_idx.extend_from_slice(&shuffled[..t]);
            val_idx.extend_from_slice(&shuffled[t..t + v]);
            train_idx.extend_from_slice(&shuffled[t + v..]);
        }
        (test_idx, val_idx, train_idx)
    } else {
        let mut shuffled: Vec<usize> = (0..n).collect();
        shuffled.shuffle(&mut rng);
        let test_idx = shuffled[..n_test].to_vec();
        let val_idx = shuffled[n_test..n_test + n_val].to_vec();
        let train_idx = shuffled[n_test + n_val..].to_vec();
        (test_idx, val_idx, train_idx)
    };
    test_idx.sort_unstable();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((
        dataset.subset(&train_idx),
        dataset.subset(&val_idx),
        dataset.subset(&test_idx),
    ))
}

/// Generates a 2-D imbalanced dataset: one isotropic majority Gaussian at the
/// origin with standard deviation `spread`, and minority samples split evenly
/// across `minority_clusters` Gaussians (standard deviation `0.3 * spread`)
/// centered at evenly spaced angles on a ring of radius `3 * spread`.
/// Majorities come first in row order, then minorities cluster by cluster.
pub fn make_toy(
    majority_count: usize,
    minority_count: usize,
    minority_clusters: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if majority_count == 0 || minority_count == 0 || minority_clusters == 0 {
        return Err(Error::InvalidConfig(
            "toy dataset counts must be positive".into(),
        ));
    }
    if minority_clusters > minority_count {
        return Err(Error::InvalidConfig(format!(
            "minority_clusters ({minority_clusters}) exceeds minority_count ({minority_count})"
        )));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "spread must be a positive real, got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let majority_noise = Normal::new(0.0, spread).expect("valid stddev");
    let minority_noise = Normal::new(0.0, 0.3 * spread).expect("valid stddev");

    let mut samples = Vec::with_capacity(majority_count + minority_count);
    for _ in 0..majority_count {
        let features = vec![majority_noise.sample(&mut rng), majority_noise.sample(&mut rng)];
        samples.push(LabeledSample { features, label: MAJORITY });
    }
    let base = minority_count / minority_clusters;
    let extra = minority_count % minority_clusters;
    for cluster in 0..minority_clusters {
        let angle = std::f64::consts::TAU * cluster as f64 / minority_clusters as f64;
        let center = (3.0 * spread * angle.cos(), 3.0 * spread * angle.sin());
        let count = base + usize::from(cluster < extra);
        for _ in 0..count {
            let features = vec![
                center.0 + minority_noise.sample(&mut rng),
                center.1 + minority_noise.sample(&mut rng),
            ];
            samples.push(LabeledSample { features, label: MINORITY });
        }
    }
    Dataset::new(samples)
}

/// Loads a dataset from a headered CSV whose final column is named `label`
/// and holds 0/1; all other columns must be numeric features.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::BadHeader("file is empty".into())),
    };
    let columns: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    if columns.len() < 2 {
        return Err(Error::BadHeader(
            "need at least one feature column and a label column".into(),
        ));
    }
    if columns.last().map(|c| c.trim()) != Some("label") {
        return Err(Error::BadHeader(format!(
            "final column must be named 'label', found {:?}",
            columns.last().unwrap_or(&"")
        )));
    }
    let dim = columns.len() - 1;

    let mut samples = Vec::new();
    for (row_zero, line) in lines.enumerate() {
        let row = row_zero + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse {
                row,
                column: fields.len().min(dim + 1),
                value: line.to_string(),
            });
        }
        let mut features = Vec::with_capacity(dim);
        for (col_zero, field) in fields[..dim].iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                column: col_zero + 1,
                value: field.trim().to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: col_zero + 1,
                    value: field.trim().to_string(),
                });
            }
            features.push(value);
        }
        let label_field = fields[dim].trim();
        let label_value: f64 = label_field.parse().map_err(|_| Error::Label {
            row,
            value: label_field.to_string(),
        })?;
        let label = if label_value == 0.0 {
            MAJORITY
        } else if label_value == 1.0 {
            MINORITY
        } else {
            return Err(Error::Label {
                row,
                value: label_field.to_string(),
            });
        };
        samples.push(LabeledSample { features, label });
    }
    let dataset = Dataset::new(samples)?;
    if dataset.is_empty() {
        Ok(Dataset {
            samples: Vec::new(),
            dim,
        })
    } else {
        Ok(dataset)
    }
}

/// Writes the inverse of [`load_csv`]: header `f1,...,fd,label`, features
/// printed with shortest round-trip formatting so a reload is exact.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (1..=dataset.dim()).map(|i| format!("f{i}")).collect();
    writeln!(writer, "{},label", header.join(","))?;
    for sample in dataset.iter() {
        let fields: Vec<String> = sample.features.iter().map(|v| format!("{v}")).collect();
        writeln!(writer, "{},{}", fields.join(","), sample.label)?;
    }
    writer.flush()?;
    Ok(())
}

/// Draws a uniformly random member of `items`.
pub(crate) fn choose<'a, T>(items: &'a [T], rng: &mut impl Rng) -> &'a T {
    &items[rng.random_range(0..items.len())]
}
