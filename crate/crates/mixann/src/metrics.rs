//! Macro-averaged precision, recall, and F1 for binary labels.
//!
//! Scores are computed per class and averaged with equal weight, so the
//! minority class counts as much as the majority. Any per-class ratio with a
//! zero denominator is defined as 0, which matters for degenerate predictors
//! that emit a single class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with class 1 (minority) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MacroScores {
    /// Arithmetic mean of a non-empty list of scores.
    pub fn mean(scores: &[MacroScores]) -> MacroScores {
        let n = scores.len().max(1) as f64;
        MacroScores {
            precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
            recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
            f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
        }
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_pos += 1,
            (0, 1) => cm.false_pos += 1,
            (0, 0) => cm.true_neg += 1,
            (1, 0) => cm.false_neg += 1,
            _ => {
                return Err(Error::Label {
                    row: 0,
                    value: format!("({t}, {p})"),
                })
            }
        }
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Per-class precision/recall/F1 averaged over the two classes.
pub fn macro_scores(cm: &ConfusionMatrix) -> Result<MacroScores> {
    if cm.total() == 0 {
        return Err(Error::EmptyMatrix);
    }
    // Class 1 as positive.
    let p1 = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let r1 = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    // Class 0 as positive: swap the roles of the counts.
    let p0 = ratio(cm.true_neg, cm.true_neg + cm.false_neg);
    let r0 = ratio(cm.true_neg, cm.true_neg + cm.false_pos);
    Ok(MacroScores {
        precision: (p0 + p1) / 2.0,
        recall: (r0 + r1) / 2.0,
        f1: (f1_of(p0, r0) + f1_of(p1, r1)) / 2.0,
    })
}

/// Applies the 0.5 decision rule: probability strictly above 0.5 is class 1.
pub fn threshold_label(probability: f64) -> u8 {
    u8::from(probability > 0.5)
}
