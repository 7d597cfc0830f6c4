//! Iterative mix-up data augmentation for imbalanced binary classification.
//!
//! The crate trains a data-mixing policy with a deterministic actor-critic:
//! each step picks a pair of opposite-label source samples, blends them into
//! synthetic points with a hard label, feeds them to the classifier under
//! test, and collects a reward that trades validation improvement against
//! classifier uncertainty near the new points. Classical oversamplers
//! (random averaging, SMOTE, Borderline-SMOTE, ADASYN, an entropy-weighted
//! mixer) are included for comparison, along with a seeded benchmark harness
//! that emits machine- and human-readable reports.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --example toy_data
//! cargo run --example oversamplers
//! cargo run --example classifier_basics
//! cargo run --example policy_training
//! cargo run --example benchmark
//! cargo run --example sweep
//! cargo run --example case_study
//! ```
//!
//! or with the thin CLI wrapper:
//!
//! ```bash
//! mixann benchmark --config experiment.json
//! ```

pub mod agent;
pub mod baselines;
pub mod classifiers;
pub mod cli;
pub mod config;
pub mod data;
pub mod env;
pub mod error;
pub mod metrics;
pub mod mixup;
pub mod neighbors;
pub mod nn;
pub mod trainer;

pub use error::{Error, Result};
