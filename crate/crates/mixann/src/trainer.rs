//! End-to-end training and benchmarking: pretrain the classifier, run
//! episodic policy learning against the mix-up environment, roll the greedy
//! policy out into an augmentation set, and score methods across seeds.
//!
//! Episodes are isolated by default: the classifier is restored from its
//! pretrained snapshot and the synthetic pool is dropped at every episode
//! start, so the reward baseline stays stationary. Set
//! `reset_classifier_per_episode: false` to let state accumulate instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, ActionBounds, TransitionRecord};
use crate::baselines::{self, OversampleRequest};
use crate::classifiers::{self, evaluate, evaluate_metric, ClassifierSpec, ClassifierState};
use crate::data::{split, Dataset, LabeledSample, SplitSpec, MINORITY};
use crate::env::{Action, EnvConfig, MixEnv, StepDiagnostics};
use crate::error::{Error, Result};
use crate::metrics::MacroScores;

/// Named streams carved out of one experiment seed. Distinct tags give
/// independent substreams for each randomized stage of a run.
pub fn subseed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the combined value.
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_CLASSIFIER: u64 = 1;
const STREAM_ENV: u64 = 2;
const STREAM_AGENT: u64 = 3;
const STREAM_OVERSAMPLE: u64 = 4;
const STREAM_FINAL_FIT: u64 = 5;
const STREAM_RANDOM_REWARD: u64 = 6;
const STREAM_ROLLOUT: u64 = 7;

/// Which reward the stored transitions carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Scale times improvement times uncertainty.
    Full,
    /// A uniform draw from [0, 1), ignoring the environment.
    Random,
    /// The raw validation score replaces the improvement term.
    NoImprovement,
    /// The uncertainty factor is pinned to 1.
    NoExploration,
}

impl RewardMode {
    pub fn all() -> [RewardMode; 4] {
        [Self::Full, Self::Random, Self::NoImprovement, Self::NoExploration]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Random => "random",
            Self::NoImprovement => "no_improvement",
            Self::NoExploration => "no_exploration",
        }
    }
}

/// The stored reward for one step under the given mode.
pub fn reward_for_mode(
    mode: RewardMode,
    diagnostics: &StepDiagnostics,
    reward_scale: f64,
    random_rewards: &mut ChaCha8Rng,
) -> f64 {
    match mode {
        RewardMode::Full => reward_scale * diagnostics.improvement * diagnostics.confidence,
        RewardMode::Random => random_rewards.random_range(0.0..1.0),
        RewardMode::NoImprovement => reward_scale * diagnostics.val_score * diagnostics.confidence,
        RewardMode::NoExploration => reward_scale * diagnostics.improvement,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub env: EnvConfig,
    pub agent: crate::agent::AgentConfig,
    pub classifier: ClassifierSpec,
    /// Training episodes.
    pub episodes: usize,
    pub reward_mode: RewardMode,
    /// Greedy episodes collected into the final augmentation set.
    pub rollout_episodes: usize,
    /// Restore the pretrained classifier and drop synthetics per episode.
    pub reset_classifier_per_episode: bool,
    pub seeds: Vec<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            agent: crate::agent::AgentConfig::default(),
            classifier: ClassifierSpec::default(),
            episodes: 100,
            reward_mode: RewardMode::Full,
            rollout_episodes: 5,
            reset_classifier_per_episode: true,
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.agent.validate()?;
        self.classifier.validate()?;
        if self.episodes == 0 {
            return Err(Error::InvalidConfig("episodes must be positive".into()));
        }
        if self.rollout_episodes == 0 {
            return Err(Error::InvalidConfig("rollout_episodes must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        Ok(())
    }

    /// Copy with every stage seeded from `seed`'s named substreams.
    pub fn reseeded(&self, seed: u64) -> TrainConfig {
        let mut cfg = self.clone();
        cfg.classifier.seed = subseed(seed, STREAM_CLASSIFIER);
        cfg.env.seed = subseed(seed, STREAM_ENV);
        cfg.agent.seed = subseed(seed, STREAM_AGENT);
        cfg
    }
}

/// One logged environment step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub episode: usize,
    pub step: usize,
    pub x0_index: usize,
    pub x1_index: usize,
    pub action: Action,
    pub reward: f64,
    pub improvement: f64,
    pub confidence: f64,
    pub val_score: f64,
    pub terminal: bool,
}

/// Aggregate view of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub episode_lengths: Vec<usize>,
    pub synthetic_total: usize,
    pub synthetic_minority: usize,
    pub synthetic_majority: usize,
}

/// Everything `train_policy` produces.
#[derive(Debug)]
pub struct PolicyArtifacts {
    pub agent: Agent,
    pub trace: Vec<StepTrace>,
    pub summary: TrainSummary,
    /// Classifier snapshot taken right after pretraining.
    pub pretrained: ClassifierState,
    pub pretrained_score: f64,
}

/// Episodic policy training: pretrain the classifier, then for each episode
/// roll the noisy policy through the environment, storing mode-adjusted
/// rewards and running the configured number of agent updates per step.
pub fn train_policy(cfg: &TrainConfig, train: &Dataset, val: &Dataset) -> Result<PolicyArtifacts> {
    cfg.validate()?;
    let classifier = classifiers::fit(&cfg.classifier, train)?;
    let pretrained_score = evaluate_metric(&classifier, val, cfg.env.metric)?;
    let pretrained = classifier.clone();

    let mut env = MixEnv::new(train, val, classifier, pretrained_score, cfg.env.clone())?;
    let bounds = ActionBounds::new(cfg.env.max_neighborhood, cfg.env.max_copies);
    let mut agent = Agent::new(env.state_dim(), cfg.agent.clone(), bounds)?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(cfg.env.seed);
    let mut random_rewards = ChaCha8Rng::seed_from_u64(subseed(cfg.env.seed, STREAM_RANDOM_REWARD));

    let mut trace = Vec::new();
    let mut summary = TrainSummary {
        episode_lengths: Vec::with_capacity(cfg.episodes),
        synthetic_total: 0,
        synthetic_minority: 0,
        synthetic_majority: 0,
    };

    for episode in 0..cfg.episodes {
        if cfg.reset_classifier_per_episode {
            env.reset(pretrained.clone());
        }
        let sigma = noise_at(cfg, episode);
        let mut state = env.initial_state(&mut env_rng)?;
        let mut length = 0;
        loop {
            let raw = agent.act(&state.vector, sigma)?;
            let action = agent.transform(&raw);
            let outcome = env.step(&state, &action, &mut env_rng)?;
            let reward = reward_for_mode(
                cfg.reward_mode,
                &outcome.diagnostics,
                cfg.env.reward_scale,
                &mut random_rewards,
            );
            agent.observe(TransitionRecord {
                state: state.vector.clone(),
                action_raw: raw,
                reward,
                next_state: outcome.next_state.vector.clone(),
                terminal: outcome.terminal,
            });
            for _ in 0..cfg.agent.updates_per_step {
                agent.update()?;
            }
            length += 1;
            summary.synthetic_total += outcome.synthetics.len();
            for s in &outcome.synthetics {
                if s.label == MINORITY {
                    summary.synthetic_minority += 1;
                } else {
                    summary.synthetic_majority += 1;
                }
            }
            trace.push(StepTrace {
                episode,
                step: length - 1,
                x0_index: state.x0_index,
                x1_index: state.x1_index,
                action,
                reward,
                improvement: outcome.diagnostics.improvement,
                confidence: outcome.diagnostics.confidence,
                val_score: outcome.diagnostics.val_score,
                terminal: outcome.terminal,
            });
            if outcome.terminal {
                break;
            }
            state = outcome.next_state;
        }
        summary.episode_lengths.push(length);
    }

    Ok(PolicyArtifacts { agent, trace, summary, pretrained, pretrained_score })
}

fn noise_at(cfg: &TrainConfig, episode: usize) -> f64 {
    if cfg.episodes <= 1 {
        return cfg.agent.noise_sigma;
    }
    let t = episode as f64 / (cfg.episodes - 1) as f64;
    cfg.agent.noise_sigma + t * (cfg.agent.noise_sigma_final - cfg.agent.noise_sigma)
}

/// Greedy rollouts: from `rollout_episodes` independent initial states, the
/// noise-free policy runs against a fresh classifier snapshot each time; all
/// generated synthetics are pooled into one augmentation set.
pub fn final_rollout(
    agent: &Agent,
    pretrained: &ClassifierState,
    pretrained_score: f64,
    cfg: &TrainConfig,
    train: &Dataset,
    val: &Dataset,
) -> Result<Vec<LabeledSample>> {
    let mut env = MixEnv::new(train, val, pretrained.clone(), pretrained_score, cfg.env.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.env.seed, STREAM_ROLLOUT));
    let mut synthetics = Vec::new();
    for _ in 0..cfg.rollout_episodes {
        env.reset(pretrained.clone());
        let mut state = env.initial_state(&mut rng)?;
        loop {
            let raw = agent.greedy_raw(&state.vector)?;
            let action = agent.transform(&raw);
            let outcome = env.step(&state, &action, &mut rng)?;
            synthetics.extend(outcome.synthetics);
            if outcome.terminal {
                break;
            }
            state = outcome.next_state;
        }
    }
    Ok(synthetics)
}

/// Augmentation methods selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    Random,
    Smote,
    BorderlineSmote,
    Adasyn,
    Mixboost,
    Mixann,
}

impl Method {
    pub fn parse(name: &str) -> Result<Method> {
        Ok(match name {
            "none" => Method::None,
            "random" => Method::Random,
            "smote" => Method::Smote,
            "borderline_smote" => Method::BorderlineSmote,
            "adasyn" => Method::Adasyn,
            "mixboost" => Method::Mixboost,
            "mixann" => Method::Mixann,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown method {other:?}; expected one of none, random, smote, \
                     borderline_smote, adasyn, mixboost, mixann"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Random => "random",
            Method::Smote => "smote",
            Method::BorderlineSmote => "borderline_smote",
            Method::Adasyn => "adasyn",
            Method::Mixboost => "mixboost",
            Method::Mixann => "mixann",
        }
    }

    /// Does this method need the classical oversample settings?
    pub fn needs_oversample_settings(&self) -> bool {
        matches!(
            self,
            Method::Random | Method::Smote | Method::BorderlineSmote | Method::Adasyn | Method::Mixboost
        )
    }
}

/// Split fractions shared by every seed of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSettings {
    pub test_fraction: f64,
    pub val_fraction_of_train: f64,
    #[serde(default = "default_true")]
    pub stratified: bool,
}

fn default_true() -> bool {
    true
}

impl SplitSettings {
    pub fn with_seed(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            val_fraction_of_train: self.val_fraction_of_train,
            stratified: self.stratified,
            seed,
        }
    }
}

/// Classical-oversampler settings shared by every seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OversampleSettings {
    pub n_synthetic: usize,
    #[serde(default = "default_k_neighbors")]
    pub k_neighbors: usize,
}

fn default_k_neighbors() -> usize {
    5
}

/// Everything one experiment needs besides the dataset and method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSetup {
    pub split: SplitSettings,
    pub train: TrainConfig,
    pub oversample: Option<OversampleSettings>,
}

/// One seed's scores and augmentation footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub scores: MacroScores,
    pub synthetics: usize,
    pub synthetic_minority: usize,
    pub synthetic_majority: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_episode_length: Option<f64>,
}

/// Per-method scores averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: String,
    pub classifier: String,
    pub per_seed: Vec<SeedOutcome>,
    pub mean: MacroScores,
    pub synthetics_total: usize,
    pub synthetics_minority: usize,
    pub synthetics_majority: usize,
}

/// A full step trace for one seed of a policy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTrace {
    pub seed: u64,
    pub steps: Vec<StepTrace>,
}

#[derive(Debug)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub traces: Vec<SeedTrace>,
}

/// Runs `method` for every configured seed: split, generate the
/// augmentation set, fit a fresh classifier on train plus synthetics, and
/// score the held-out test split. Seeds run independently (in parallel when
/// a rayon pool is configured) and aggregate to the plain mean.
pub fn run_experiment(
    setup: &ExperimentSetup,
    dataset: &Dataset,
    method: Method,
    collect_traces: bool,
) -> Result<ExperimentRun> {
    setup.train.validate()?;
    if method.needs_oversample_settings() && setup.oversample.is_none() {
        return Err(Error::InvalidConfig(format!(
            "method {:?} requires oversample settings",
            method.name()
        )));
    }
    let runs: Vec<(SeedOutcome, Option<SeedTrace>)> = setup
        .train
        .seeds
        .par_iter()
        .map(|&seed| run_single_seed(setup, dataset, method, seed, collect_traces))
        .collect::<Result<_>>()?;

    let mut per_seed = Vec::with_capacity(runs.len());
    let mut traces = Vec::new();
    for (outcome, trace) in runs {
        per_seed.push(outcome);
        if let Some(t) = trace {
            traces.push(t);
        }
    }
    let mean = MacroScores::mean(&per_seed.iter().map(|s| s.scores).collect::<Vec<_>>());
    let report = ExperimentReport {
        method: method.name().to_string(),
        classifier: setup.train.classifier.kind_name().to_string(),
        synthetics_total: per_seed.iter().map(|s| s.synthetics).sum(),
        synthetics_minority: per_seed.iter().map(|s| s.synthetic_minority).sum(),
        synthetics_majority: per_seed.iter().map(|s| s.synthetic_majority).sum(),
        per_seed,
        mean,
    };
    Ok(ExperimentRun { report, traces })
}

/// The augmentation set one method produces for one seed's train/val split.
/// Policy methods train and roll out; classical methods draw directly.
pub fn generate_augmentation(
    setup: &ExperimentSetup,
    train: &Dataset,
    val: &Dataset,
    method: Method,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    Ok(generate_augmentation_traced(setup, train, val, method, seed, false)?.0)
}

struct PolicyStats {
    mean_episode_length: f64,
    trace: Option<Vec<StepTrace>>,
}

fn generate_augmentation_traced(
    setup: &ExperimentSetup,
    train: &Dataset,
    val: &Dataset,
    method: Method,
    seed: u64,
    collect_trace: bool,
) -> Result<(Vec<LabeledSample>, Option<PolicyStats>)> {
    let oversample_request = |settings: &OversampleSettings| {
        OversampleRequest::new(
            settings.n_synthetic,
            settings.k_neighbors,
            subseed(seed, STREAM_OVERSAMPLE),
        )
    };
    let settings_for = |method: Method| {
        setup.oversample.ok_or_else(|| {
            Error::InvalidConfig(format!("method {:?} requires oversample settings", method.name()))
        })
    };
    let synthetics = match method {
        Method::None => Vec::new(),
        Method::Random => baselines::random_oversample(train, &oversample_request(&settings_for(method)?))?,
        Method::Smote => baselines::smote(train, &oversample_request(&settings_for(method)?))?,
        Method::BorderlineSmote => {
            baselines::borderline_smote(train, &oversample_request(&settings_for(method)?))?
        }
        Method::Adasyn => baselines::adasyn(train, &oversample_request(&settings_for(method)?))?,
        Method::Mixboost => {
            let settings = settings_for(method)?;
            let mut spec = setup.train.classifier.clone();
            spec.seed = subseed(seed, STREAM_CLASSIFIER);
            let classifier = classifiers::fit(&spec, train)?;
            baselines::mixboost(
                train,
                &classifier,
                &oversample_request(&settings),
                setup.train.env.label_threshold,
            )?
        }
        Method::Mixann => {
            let cfg = setup.train.reseeded(seed);
            let artifacts = train_policy(&cfg, train, val)?;
            let lengths = &artifacts.summary.episode_lengths;
            let stats = PolicyStats {
                mean_episode_length: lengths.iter().sum::<usize>() as f64
                    / lengths.len().max(1) as f64,
                trace: collect_trace.then(|| artifacts.trace.clone()),
            };
            let synthetics = final_rollout(
                &artifacts.agent,
                &artifacts.pretrained,
                artifacts.pretrained_score,
                &cfg,
                train,
                val,
            )?;
            return Ok((synthetics, Some(stats)));
        }
    };
    Ok((synthetics, None))
}

/// Fits a fresh classifier on `train` plus `synthetics` under the seed's
/// final-fit substream.
pub fn fit_augmented(
    setup: &ExperimentSetup,
    train: &Dataset,
    synthetics: &[LabeledSample],
    seed: u64,
) -> Result<ClassifierState> {
    let mut spec = setup.train.classifier.clone();
    spec.seed = subseed(seed, STREAM_FINAL_FIT);
    classifiers::fit(&spec, &train.augmented(synthetics)?)
}

fn run_single_seed(
    setup: &ExperimentSetup,
    dataset: &Dataset,
    method: Method,
    seed: u64,
    collect_traces: bool,
) -> Result<(SeedOutcome, Option<SeedTrace>)> {
    let (train, val, test) = split(dataset, &setup.split.with_seed(seed))?;
    let (synthetics, stats) =
        generate_augmentation_traced(setup, &train, &val, method, seed, collect_traces)?;
    let classifier = fit_augmented(setup, &train, &synthetics, seed)?;
    let scores = evaluate(&classifier, &test)?;

    let trace = stats
        .as_ref()
        .and_then(|s| s.trace.clone())
        .map(|steps| SeedTrace { seed, steps });
    let synthetic_minority = synthetics.iter().filter(|s| s.label == MINORITY).count();
    let outcome = SeedOutcome {
        seed,
        scores,
        synthetics: synthetics.len(),
        synthetic_minority,
        synthetic_majority: synthetics.len() - synthetic_minority,
        mean_episode_length: stats.map(|s| s.mean_episode_length),
    };
    Ok((outcome, trace))
}
