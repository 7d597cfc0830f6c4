//! The iterative mix-up environment: states pair a freely drawn sample with
//! its nearest opposite-label partner; actions steer one mix-up burst; the
//! reward multiplies validation improvement by classifier uncertainty near
//! the synthetic point.
//!
//! One step: synthesize `copies` identical samples from the state pair,
//! update the classifier with them, score the validation split, then read
//! the k-nearest neighborhood of the synthetic point off the pool as it
//! stood at step entry (original samples plus synthetics from earlier
//! steps). That one neighborhood supplies both the uncertainty factor and
//! the next source pair; the new synthetics join the pool afterwards, so a
//! burst can never be its own zero-distance neighborhood.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{evaluate_metric, Classifier, EvalMetric};
use crate::data::{Dataset, LabeledSample};
use crate::error::{Error, Result};
use crate::mixup::{self, MixConfig, SourcePair};
use crate::neighbors::NeighborIndex;

/// A source pair plus its flattened form fed to the policy networks.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x0: LabeledSample,
    pub x1: LabeledSample,
    /// Pool row of `x0` at the time the state was formed.
    pub x0_index: usize,
    /// Pool row of `x1` at the time the state was formed.
    pub x1_index: usize,
    /// `x0.features` followed by `x1.features`.
    pub vector: Vec<f64>,
}

impl State {
    fn from_pool(index: &NeighborIndex, x0_index: usize, x1_index: usize) -> Self {
        let x0 = LabeledSample {
            features: index.point(x0_index).to_vec(),
            label: index.label(x0_index),
        };
        let x1 = LabeledSample {
            features: index.point(x1_index).to_vec(),
            label: index.label(x1_index),
        };
        let mut vector = x0.features.clone();
        vector.extend_from_slice(&x1.features);
        State { x0, x1, x0_index, x1_index, vector }
    }

    pub fn pair(&self) -> Result<SourcePair> {
        SourcePair::new(self.x0.clone(), self.x1.clone())
    }
}

/// One mix-up decision: neighborhood size for the next-pair draw, mix
/// ratio, number of identical copies, and the stop signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub k: usize,
    pub mix_ratio: f64,
    pub copies: usize,
    /// Stop signals at or above 0.5 end the episode after this step.
    pub stop_signal: f64,
}

impl Action {
    pub fn validate(&self, cfg: &EnvConfig) -> Result<()> {
        if self.k == 0 || self.k > cfg.max_neighborhood {
            return Err(Error::InvalidConfig(format!(
                "action k={} outside [1, {}]",
                self.k, cfg.max_neighborhood
            )));
        }
        if self.copies == 0 || self.copies > cfg.max_copies {
            return Err(Error::InvalidConfig(format!(
                "action copies={} outside [1, {}]",
                self.copies, cfg.max_copies
            )));
        }
        if !(0.0..=1.0).contains(&self.mix_ratio) {
            return Err(Error::MixRatioOutOfRange(self.mix_ratio));
        }
        if !(0.0..=1.0).contains(&self.stop_signal) {
            return Err(Error::InvalidConfig(format!(
                "stop_signal {} outside [0, 1]",
                self.stop_signal
            )));
        }
        Ok(())
    }

    pub fn stops(&self) -> bool {
        self.stop_signal >= 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// Upper bound K on the neighborhood component of actions.
    pub max_neighborhood: usize,
    /// Upper bound on the copies component of actions.
    pub max_copies: usize,
    /// Hard-label threshold for synthetics.
    pub label_threshold: f64,
    /// Reward strength multiplier.
    pub reward_scale: f64,
    /// Trailing-window length for the improvement baseline.
    pub baseline_window: usize,
    /// Step budget per episode; stops runaway policies that never signal.
    pub max_steps: usize,
    pub metric: EvalMetric,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            max_neighborhood: 10,
            max_copies: 5,
            label_threshold: 0.3,
            reward_scale: 10.0,
            baseline_window: 25,
            max_steps: 50,
            metric: EvalMetric::MacroF1,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_neighborhood == 0 || self.max_copies == 0 || self.max_steps == 0 {
            return Err(Error::InvalidConfig(
                "max_neighborhood, max_copies, and max_steps must be positive".into(),
            ));
        }
        if self.reward_scale <= 0.0 || self.reward_scale.is_nan() {
            return Err(Error::InvalidConfig("reward_scale must be positive".into()));
        }
        if self.baseline_window < 2 {
            return Err(Error::InvalidConfig(
                "baseline_window must be at least 2".into(),
            ));
        }
        MixConfig { label_threshold: self.label_threshold }.validate()
    }

    pub fn mix_config(&self) -> MixConfig {
        MixConfig { label_threshold: self.label_threshold }
    }
}

/// Reward ingredients surfaced alongside the combined value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// Validation gain over the trailing baseline.
    pub improvement: f64,
    /// Mean p(1-p) over the synthetic point's neighborhood.
    pub confidence: f64,
    /// Validation score after this step's classifier update.
    pub val_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: State,
    pub reward: f64,
    pub synthetics: Vec<LabeledSample>,
    pub terminal: bool,
    pub diagnostics: StepDiagnostics,
}

/// Validation gain over the mean of the most recent window of scores; an
/// empty history falls back to the pretrained classifier's score.
pub fn improvement_stimulation(
    history: &[f64],
    current: f64,
    pretrained_score: f64,
    window: usize,
) -> f64 {
    if history.is_empty() {
        return current - pretrained_score;
    }
    let tail = &history[history.len().saturating_sub(window)..];
    current - tail.iter().sum::<f64>() / tail.len() as f64
}

/// Mean predictive uncertainty p(1-p) over a set of points; ranges over
/// [0, 0.25] and peaks where the classifier is least decided.
pub fn model_exploration<C: Classifier + ?Sized>(
    classifier: &C,
    points: &[&[f64]],
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    let mut total = 0.0;
    for &point in points {
        let p = classifier.predict_proba(point)?;
        total += p * (1.0 - p);
    }
    Ok(total / points.len() as f64)
}

/// Owns the classifier under training, the growing sample pool, and the
/// per-episode score history.
#[derive(Debug, Clone)]
pub struct MixEnv<C: Classifier> {
    classifier: C,
    pool: NeighborIndex,
    original_len: usize,
    val: Dataset,
    cfg: EnvConfig,
    pretrained_score: f64,
    history: Vec<f64>,
    steps: usize,
}

impl<C: Classifier> MixEnv<C> {
    /// `pretrained_score` is the classifier's validation score before any
    /// synthetic data; it anchors the improvement baseline at episode start.
    pub fn new(
        train: &Dataset,
        val: &Dataset,
        classifier: C,
        pretrained_score: f64,
        cfg: EnvConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if !train.has_both_classes() {
            return Err(Error::SingleClassData);
        }
        if train.dim() != val.dim() {
            return Err(Error::DimensionMismatch {
                expected: train.dim(),
                got: val.dim(),
            });
        }
        let pool = NeighborIndex::from_dataset(train)?;
        let original_len = pool.len();
        Ok(Self {
            classifier,
            pool,
            original_len,
            val: val.clone(),
            cfg,
            pretrained_score,
            history: Vec::new(),
            steps: 0,
        })
    }

    /// Swaps in a fresh classifier snapshot, drops accumulated synthetics,
    /// and clears the episode score history.
    pub fn reset(&mut self, classifier: C) {
        self.classifier = classifier;
        self.pool.truncate(self.original_len);
        self.history.clear();
        self.steps = 0;
    }

    pub fn classifier(&self) -> &C {
        &self.classifier
    }

    pub fn cfg(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn pool(&self) -> &NeighborIndex {
        &self.pool
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn state_dim(&self) -> usize {
        2 * self.pool.dim()
    }

    /// Draws `x0` uniformly from the pool and pairs it with the nearest
    /// opposite-label point.
    pub fn initial_state(&self, rng: &mut ChaCha8Rng) -> Result<State> {
        let x0_index = rng.random_range(0..self.pool.len());
        let wanted = 1 - self.pool.label(x0_index);
        let (x1_index, _) = self.pool.nearest_with_label(self.pool.point(x0_index), wanted)?;
        Ok(State::from_pool(&self.pool, x0_index, x1_index))
    }

    /// Runs one mix-up burst. See the module docs for the exact ordering of
    /// classifier update, scoring, neighborhood query, and pool growth.
    pub fn step(
        &mut self,
        state: &State,
        action: &Action,
        rng: &mut ChaCha8Rng,
    ) -> Result<StepOutcome> {
        action.validate(&self.cfg)?;
        let pair = state.pair()?;
        let synthetics =
            mixup::synthesize(&pair, action.mix_ratio, action.copies, &self.cfg.mix_config())?;

        self.classifier.update(&synthetics)?;
        let val_score = evaluate_metric(&self.classifier, &self.val, self.cfg.metric)?;
        let improvement = improvement_stimulation(
            &self.history,
            val_score,
            self.pretrained_score,
            self.cfg.baseline_window,
        );

        // The pool still excludes this burst: its neighborhood is made of
        // original samples and earlier synthetics.
        let synthetic_point = &synthetics[0].features;
        let neighbors = self.pool.k_nearest(synthetic_point, action.k)?;
        let neighbor_points: Vec<&[f64]> =
            neighbors.iter().map(|&(i, _)| self.pool.point(i)).collect();
        let confidence = model_exploration(&self.classifier, &neighbor_points)?;
        let reward = self.cfg.reward_scale * improvement * confidence;

        let x0_index = neighbors[rng.random_range(0..neighbors.len())].0;
        let wanted = 1 - self.pool.label(x0_index);
        let (x1_index, _) = self
            .pool
            .nearest_with_label(self.pool.point(x0_index), wanted)
            .map_err(|_| Error::SingleClassData)?;
        let next_state = State::from_pool(&self.pool, x0_index, x1_index);

        for s in &synthetics {
            self.pool.append(s.features.clone(), s.label)?;
        }
        self.history.push(val_score);
        self.steps += 1;
        let terminal = action.stops() || self.steps >= self.cfg.max_steps;

        Ok(StepOutcome {
            next_state,
            reward,
            synthetics,
            terminal,
            diagnostics: StepDiagnostics { improvement, confidence, val_score },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ClassifierSpec};
    use crate::data::make_toy;
    use rand::SeedableRng;

    /// Scripted classifier: constant probability, counts pool growth.
    #[derive(Debug, Clone, PartialEq)]
    struct Stub {
        proba: f64,
        pool: usize,
    }

    impl Classifier for Stub {
        fn predict_proba(&self, _x: &[f64]) -> Result<f64> {
            Ok(self.proba)
        }
        fn update(&mut self, new_samples: &[LabeledSample]) -> Result<()> {
            self.pool += new_samples.len();
            Ok(())
        }
        fn pool_len(&self) -> usize {
            self.pool
        }
    }

    fn tiny_dataset() -> Dataset {
        Dataset::new(vec![
            LabeledSample { features: vec![0.0, 0.0], label: 0 },
            LabeledSample { features: vec![0.5, 0.0], label: 0 },
            LabeledSample { features: vec![4.0, 0.0], label: 1 },
            LabeledSample { features: vec![4.5, 0.0], label: 1 },
        ])
        .unwrap()
    }

    fn default_env(stub_proba: f64) -> MixEnv<Stub> {
        let train = tiny_dataset();
        let val = tiny_dataset();
        MixEnv::new(
            &train,
            &val,
            Stub { proba: stub_proba, pool: train.len() },
            0.5,
            EnvConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn initial_state_pairs_opposite_labels() {
        let env = default_env(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let s = env.initial_state(&mut rng).unwrap();
            assert_ne!(s.x0.label, s.x1.label);
            let mut expected = s.x0.features.clone();
            expected.extend_from_slice(&s.x1.features);
            assert_eq!(s.vector, expected);
        }
    }

    #[test]
    fn initial_state_two_point_dataset_pairs_them() {
        let train = Dataset::new(vec![
            LabeledSample { features: vec![0.0, 0.0], label: 0 },
            LabeledSample { features: vec![1.0, 1.0], label: 1 },
        ])
        .unwrap();
        let env = MixEnv::new(
            &train,
            &train,
            Stub { proba: 0.5, pool: 2 },
            0.5,
            EnvConfig::default(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = env.initial_state(&mut rng).unwrap();
        assert_ne!(s.x0_index, s.x1_index);
    }

    #[test]
    fn initial_state_is_rng_deterministic() {
        let env = default_env(0.5);
        let a = env.initial_state(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = env.initial_state(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn improvement_examples() {
        assert!(improvement_stimulation(&[0.8, 0.8, 0.8], 0.8, 0.0, 25).abs() < 1e-12);
        assert!((improvement_stimulation(&[0.5, 0.7], 0.9, 0.0, 25) - 0.3).abs() < 1e-12);
        assert!((improvement_stimulation(&[], 0.75, 0.7, 25) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn improvement_uses_only_the_window() {
        let history = [0.0, 0.0, 0.0, 0.6, 0.8];
        assert!((improvement_stimulation(&history, 0.7, 0.0, 2) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn exploration_examples() {
        let stub = Stub { proba: 0.5, pool: 0 };
        let points: Vec<&[f64]> = vec![&[0.0], &[1.0]];
        assert_eq!(model_exploration(&stub, &points).unwrap(), 0.25);

        let certain = Stub { proba: 1.0, pool: 0 };
        assert_eq!(model_exploration(&certain, &points).unwrap(), 0.0);

        // Probabilities 0.2 and 0.8 both contribute 0.16.
        #[derive(Debug)]
        struct TwoValued;
        impl Classifier for TwoValued {
            fn predict_proba(&self, x: &[f64]) -> Result<f64> {
                Ok(if x[0] < 0.5 { 0.2 } else { 0.8 })
            }
            fn update(&mut self, _: &[LabeledSample]) -> Result<()> {
                Ok(())
            }
            fn pool_len(&self) -> usize {
                0
            }
        }
        let got = model_exploration(&TwoValued, &points).unwrap();
        assert!((got - 0.16).abs() < 1e-12);
    }

    #[test]
    fn exploration_rejects_empty_neighborhood() {
        let stub = Stub { proba: 0.5, pool: 0 };
        assert!(matches!(
            model_exploration(&stub, &[]).unwrap_err(),
            Error::EmptyNeighborhood
        ));
    }

    #[test]
    fn identity_mix_with_stop_terminates() {
        let mut env = default_env(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = env.initial_state(&mut rng).unwrap();
        let action = Action { k: 2, mix_ratio: 1.0, copies: 1, stop_signal: 0.9 };
        let outcome = env.step(&state, &action, &mut rng).unwrap();
        assert!(outcome.terminal);
        assert_eq!(outcome.synthetics.len(), 1);
        assert_eq!(outcome.synthetics[0].features, state.x0.features);
        assert_eq!(outcome.synthetics[0].label, state.x0.label);
    }

    #[test]
    fn classifier_pool_grows_by_copies() {
        let mut env = default_env(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let state = env.initial_state(&mut rng).unwrap();
        let before = env.classifier().pool_len();
        let action = Action { k: 2, mix_ratio: 0.5, copies: 3, stop_signal: 0.1 };
        env.step(&state, &action, &mut rng).unwrap();
        assert_eq!(env.classifier().pool_len(), before + 3);
        assert_eq!(env.pool_len(), 4 + 3);
    }

    #[test]
    fn frozen_score_gives_zero_reward() {
        // Constant stub probability 0.5 predicts all zeros, freezing the
        // validation score; with the pretrained baseline equal to that
        // score, the improvement term vanishes.
        let train = tiny_dataset();
        let stub = Stub { proba: 0.5, pool: train.len() };
        let frozen = evaluate_metric(&stub, &train, EvalMetric::MacroF1).unwrap();
        let mut env = MixEnv::new(&train, &train, stub, frozen, EnvConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = env.initial_state(&mut rng).unwrap();
        let action = Action { k: 2, mix_ratio: 0.5, copies: 1, stop_signal: 0.1 };
        let outcome = env.step(&state, &action, &mut rng).unwrap();
        assert_eq!(outcome.reward, 0.0);
        assert_eq!(outcome.diagnostics.confidence, 0.25);
        assert_eq!(outcome.diagnostics.improvement, 0.0);
    }

    #[test]
    fn reward_is_scale_times_improvement_times_confidence() {
        let train = tiny_dataset();
        let stub = Stub { proba: 0.5, pool: train.len() };
        let frozen = evaluate_metric(&stub, &train, EvalMetric::MacroF1).unwrap();
        // Shift the pretrained baseline down 0.02: improvement = 0.02.
        let mut env =
            MixEnv::new(&train, &train, stub, frozen - 0.02, EnvConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let state = env.initial_state(&mut rng).unwrap();
        let action = Action { k: 3, mix_ratio: 0.4, copies: 2, stop_signal: 0.0 };
        let outcome = env.step(&state, &action, &mut rng).unwrap();
        assert!((outcome.reward - 10.0 * 0.02 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn next_state_comes_from_the_queried_neighborhood() {
        let ds = make_toy(40, 10, 2, 1.0, 12).unwrap();
        let classifier = fit(&ClassifierSpec::knn(5, 0), &ds).unwrap();
        let mut env = MixEnv::new(&ds, &ds, classifier, 0.5, EnvConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut state = env.initial_state(&mut rng).unwrap();
        for step in 0..10usize {
            let action = Action {
                k: 1 + step % 5,
                mix_ratio: (0.1 * step as f64) % 1.0,
                copies: 1 + step % 3,
                stop_signal: 0.0,
            };
            // Snapshot the pool before stepping to recompute the oracle.
            let pool_before = env.pool().clone();
            let pair = state.pair().unwrap();
            let expected_point = crate::mixup::mix_features(
                &pair.x0.features,
                &pair.x1.features,
                action.mix_ratio,
            )
            .unwrap();
            let outcome = env.step(&state, &action, &mut rng).unwrap();
            let allowed: Vec<usize> = pool_before
                .k_nearest(&expected_point, action.k)
                .unwrap()
                .iter()
                .map(|&(i, _)| i)
                .collect();
            assert!(allowed.contains(&outcome.next_state.x0_index));
            // Partner is the nearest opposite-label point in that pool.
            let wanted = 1 - outcome.next_state.x0.label;
            let (oracle_x1, _) = pool_before
                .nearest_with_label(&outcome.next_state.x0.features, wanted)
                .unwrap();
            assert_eq!(outcome.next_state.x1_index, oracle_x1);
            state = outcome.next_state;
        }
    }

    #[test]
    fn episode_respects_step_budget() {
        let cfg = EnvConfig { max_steps: 4, ..EnvConfig::default() };
        let train = tiny_dataset();
        let stub = Stub { proba: 0.5, pool: train.len() };
        let mut env = MixEnv::new(&train, &train, stub, 0.5, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut state = env.initial_state(&mut rng).unwrap();
        let action = Action { k: 2, mix_ratio: 0.5, copies: 1, stop_signal: 0.0 };
        let mut terminal_at = None;
        for step in 1..=10 {
            let outcome = env.step(&state, &action, &mut rng).unwrap();
            if outcome.terminal {
                terminal_at = Some(step);
                break;
            }
            state = outcome.next_state;
        }
        assert_eq!(terminal_at, Some(4));
    }

    #[test]
    fn reset_restores_pool_and_history() {
        let mut env = default_env(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let state = env.initial_state(&mut rng).unwrap();
        let action = Action { k: 2, mix_ratio: 0.7, copies: 5, stop_signal: 0.0 };
        env.step(&state, &action, &mut rng).unwrap();
        assert!(env.pool_len() > 4);
        env.reset(Stub { proba: 0.5, pool: 4 });
        assert_eq!(env.pool_len(), 4);
        assert_eq!(env.steps_taken(), 0);
    }

    #[test]
    fn reward_sign_follows_improvement_and_magnitude_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            // Random stub probability and a shifted baseline so the
            // improvement term takes both signs.
            let proba = rng.random_range(0.0..=1.0);
            let shift = rng.random_range(-0.5..0.5);
            let train = tiny_dataset();
            let stub = Stub { proba, pool: train.len() };
            let frozen = evaluate_metric(&stub, &train, EvalMetric::MacroF1).unwrap();
            let mut env =
                MixEnv::new(&train, &train, stub, frozen - shift, EnvConfig::default()).unwrap();
            let state = env.initial_state(&mut rng).unwrap();
            let action = Action { k: 2, mix_ratio: 0.5, copies: 1, stop_signal: 0.0 };
            let outcome = env.step(&state, &action, &mut rng).unwrap();
            let improvement = outcome.diagnostics.improvement;
            if improvement != 0.0 {
                assert!(outcome.reward.signum() * improvement.signum() >= 0.0);
            }
            assert!(outcome.reward.abs() <= env.cfg().reward_scale * 0.25 + 1e-12);
            assert!(outcome.diagnostics.confidence >= 0.0);
            assert!(outcome.diagnostics.confidence <= 0.25);
        }
    }

    #[test]
    fn action_bounds_are_enforced() {
        let mut env = default_env(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let state = env.initial_state(&mut rng).unwrap();
        let bad = Action { k: 99, mix_ratio: 0.5, copies: 1, stop_signal: 0.0 };
        assert!(env.step(&state, &bad, &mut rng).is_err());
        let bad = Action { k: 2, mix_ratio: 1.5, copies: 1, stop_signal: 0.0 };
        assert!(env.step(&state, &bad, &mut rng).is_err());
    }
}
