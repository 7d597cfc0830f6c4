//! Experiment configuration files: strict JSON with unknown keys rejected
//! and every numeric range validated at load time.
//!
//! Per-module seed fields inside `classifier`, `env`, and `agent` are
//! accepted but replaced at run time: every experiment seed derives its own
//! substreams so runs stay independent across seeds.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::classifiers::ClassifierSpec;
use crate::data::{load_csv, make_toy, Dataset};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::trainer::{
    ExperimentSetup, Method, OversampleSettings, RewardMode, SplitSettings, TrainConfig,
};

/// Where the experiment's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    /// Generated 2-D set: one majority blob, minorities scattered in
    /// clusters on a surrounding ring.
    Toy {
        majority: usize,
        minority: usize,
        clusters: usize,
        spread: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Headered CSV whose final column is `label`.
    Csv { path: PathBuf },
}

/// Episode and rollout settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub episodes: usize,
    pub reward_mode: RewardMode,
    pub rollout_episodes: usize,
    pub reset_classifier_per_episode: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            episodes: 100,
            reward_mode: RewardMode::Full,
            rollout_episodes: 5,
            reset_classifier_per_episode: true,
        }
    }
}

/// The complete experiment description mirrored from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    pub dataset: DatasetConfig,
    pub split: SplitSettings,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub oversample: Option<OversampleSettings>,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Output directory; not echoed into reports so identical experiments
    /// written to different places stay byte-identical.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
    /// Emit a JSON-lines step trace for policy runs.
    #[serde(default)]
    pub trace: bool,
    /// Grid points per axis for decision-boundary exports.
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn default_grid_resolution() -> usize {
    200
}

impl ExperimentConfigFile {
    /// Parses and validates a config file; parse errors carry the path and
    /// the offending key or value.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path)?;
        let config: ExperimentConfigFile =
            serde_json::from_str(&text).map_err(|source| Error::ConfigJson {
                path: path.to_path_buf(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.dataset {
            DatasetConfig::Toy { majority, minority, clusters, spread, .. } => {
                if *majority == 0 || *minority == 0 || *clusters == 0 {
                    return Err(Error::InvalidConfig("toy dataset counts must be positive".into()));
                }
                if clusters > minority {
                    return Err(Error::InvalidConfig(
                        "toy dataset clusters cannot exceed the minority count".into(),
                    ));
                }
                if *spread <= 0.0 || spread.is_nan() {
                    return Err(Error::InvalidConfig("toy dataset spread must be positive".into()));
                }
            }
            DatasetConfig::Csv { .. } => {}
        }
        for (name, f) in [
            ("split.test_fraction", self.split.test_fraction),
            ("split.val_fraction_of_train", self.split.val_fraction_of_train),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {f}")));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        self.classifier.validate()?;
        self.env.validate()?;
        self.agent.validate()?;
        if self.train.episodes == 0 || self.train.rollout_episodes == 0 {
            return Err(Error::InvalidConfig(
                "train.episodes and train.rollout_episodes must be positive".into(),
            ));
        }
        if self.grid_resolution < 2 {
            return Err(Error::InvalidConfig("grid_resolution must be at least 2".into()));
        }
        if let Some(o) = &self.oversample {
            if o.n_synthetic == 0 {
                return Err(Error::InvalidConfig("oversample.n_synthetic must be at least 1".into()));
            }
            if o.k_neighbors == 0 {
                return Err(Error::InvalidConfig("oversample.k_neighbors must be at least 1".into()));
            }
        }
        for method in &self.methods {
            if method.needs_oversample_settings() && self.oversample.is_none() {
                return Err(Error::InvalidConfig(format!(
                    "method {:?} requires the oversample section",
                    method.name()
                )));
            }
        }
        if !(0.5..=1.0).contains(&self.env.label_threshold) {
            log::warn!(
                "label_threshold {} is outside the conventional [0.5, 1.0] range; \
                 low thresholds produce more minority-labeled synthetics",
                self.env.label_threshold
            );
        }
        Ok(())
    }

    /// Materializes the dataset this config describes.
    pub fn build_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetConfig::Toy { majority, minority, clusters, spread, seed } => {
                make_toy(*majority, *minority, *clusters, *spread, *seed)
            }
            DatasetConfig::Csv { path } => load_csv(path),
        }
    }

    /// Assembles the runnable experiment setup.
    pub fn setup(&self) -> ExperimentSetup {
        ExperimentSetup {
            split: self.split,
            train: TrainConfig {
                env: self.env.clone(),
                agent: self.agent.clone(),
                classifier: self.classifier.clone(),
                episodes: self.train.episodes,
                reward_mode: self.train.reward_mode,
                rollout_episodes: self.train.rollout_episodes,
                reset_classifier_per_episode: self.train.reset_classifier_per_episode,
                seeds: self.seeds.clone(),
            },
            oversample: self.oversample,
        }
    }

    /// Output directory: the config's `out_dir`, or `./out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
