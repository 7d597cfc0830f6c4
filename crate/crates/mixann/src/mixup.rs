//! The mix-up primitive: convex feature combination plus hard-label
//! synthesis via a threshold on the mix ratio.

use serde::{Deserialize, Serialize};

use crate::data::LabeledSample;
use crate::error::{Error, Result};

/// Two source samples with differing labels; `x0` is the sample whose label
/// wins when the mix ratio reaches the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePair {
    pub x0: LabeledSample,
    pub x1: LabeledSample,
}

impl SourcePair {
    pub fn new(x0: LabeledSample, x1: LabeledSample) -> Result<Self> {
        if x0.features.len() != x1.features.len() {
            return Err(Error::DimensionMismatch {
                expected: x0.features.len(),
                got: x1.features.len(),
            });
        }
        if x0.label == x1.label {
            return Err(Error::InvalidConfig(
                "source pair must combine samples with different labels".into(),
            ));
        }
        Ok(Self { x0, x1 })
    }
}

/// Mix-up settings. `label_threshold` decides which source label a
/// synthetic sample inherits; low values produce more minority-labeled
/// synthetics when the minority sample sits in the `x0` slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    pub label_threshold: f64,
}

impl Default for MixConfig {
    fn default() -> Self {
        Self { label_threshold: 0.3 }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.label_threshold) {
            return Err(Error::InvalidConfig(format!(
                "label_threshold must lie in [0, 1], got {}",
                self.label_threshold
            )));
        }
        Ok(())
    }
}

/// `ratio * x0 + (1 - ratio) * x1`, elementwise.
pub fn mix_features(x0: &[f64], x1: &[f64], ratio: f64) -> Result<Vec<f64>> {
    if x0.len() != x1.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: x1.len(),
        });
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::MixRatioOutOfRange(ratio));
    }
    Ok(x0
        .iter()
        .zip(x1)
        .map(|(a, b)| ratio * a + (1.0 - ratio) * b)
        .collect())
}

/// Hard label: `y0` when `ratio >= threshold` (boundary inclusive),
/// otherwise `y1`.
pub fn mix_label(y0: u8, y1: u8, ratio: f64, threshold: f64) -> u8 {
    if ratio >= threshold {
        y0
    } else {
        y1
    }
}

/// Produces `copies` identical synthetic samples mixed from `pair`.
/// Duplication is deliberate: repeated points act as vote weighting for
/// pool-based classifiers.
pub fn synthesize(
    pair: &SourcePair,
    ratio: f64,
    copies: usize,
    cfg: &MixConfig,
) -> Result<Vec<LabeledSample>> {
    if copies == 0 {
        return Err(Error::InvalidConfig("copies must be at least 1".into()));
    }
    cfg.validate()?;
    let features = mix_features(&pair.x0.features, &pair.x1.features, ratio)?;
    let label = mix_label(pair.x0.label, pair.x1.label, ratio, cfg.label_threshold);
    let sample = LabeledSample { features, label };
    Ok(vec![sample; copies])
}
