//! Trains the mix-up policy on the generated toy dataset and prints how the
//! reward, episode lengths, and final augmentation set evolve.
//!
//! ```bash
//! cargo run --release --example policy_training
//! ```

use mixann::classifiers::{evaluate, fit, ClassifierSpec};
use mixann::data::{make_toy, split, Dataset, SplitSpec, MINORITY};
use mixann::env::EnvConfig;
use mixann::trainer::{final_rollout, train_policy, TrainConfig};

/// Label of a trace's anchor when it points into the original train rows
/// (later rows are synthetics appended during the episode).
fn train_label(train: &Dataset, pool_index: usize) -> Option<u8> {
    train.samples().get(pool_index).map(|s| s.label)
}

fn main() -> mixann::Result<()> {
    let dataset = make_toy(600, 30, 3, 1.0, 2024)?;
    let spec = SplitSpec {
        test_fraction: 0.2,
        val_fraction_of_train: 0.2,
        stratified: true,
        seed: 0,
    };
    let (train, val, test) = split(&dataset, &spec)?;
    println!(
        "toy dataset: {} train / {} val / {} test, {} minorities in train",
        train.len(),
        val.len(),
        test.len(),
        train.count_label(MINORITY)
    );

    let cfg = TrainConfig {
        classifier: ClassifierSpec::knn(10, 0),
        episodes: 100,
        rollout_episodes: 5,
        env: EnvConfig { max_steps: 25, ..EnvConfig::default() },
        agent: mixann::agent::AgentConfig {
            actor_lr: 1e-3,
            critic_lr: 1e-2,
            noise_sigma: 1.2,
            noise_sigma_final: 0.1,
            updates_per_step: 2,
            ..mixann::agent::AgentConfig::default()
        },
        ..TrainConfig::default()
    }
    .reseeded(0);

    let artifacts = train_policy(&cfg, &train, &val)?;
    println!("pretrained validation macro-F1: {:.4}", artifacts.pretrained_score);

    // Mean stored reward over thirds of training: is the policy improving?
    let trace = &artifacts.trace;
    let third = trace.len() / 3;
    for (name, chunk) in [
        ("first third", &trace[..third]),
        ("middle third", &trace[third..2 * third]),
        ("last third", &trace[2 * third..]),
    ] {
        let mean_reward: f64 = chunk.iter().map(|t| t.reward).sum::<f64>() / chunk.len() as f64;
        let mean_ratio: f64 =
            chunk.iter().map(|t| t.action.mix_ratio).sum::<f64>() / chunk.len() as f64;
        let mean_val: f64 = chunk.iter().map(|t| t.val_score).sum::<f64>() / chunk.len() as f64;
        println!(
            "{name:12}: mean reward {mean_reward:+.5}, mean mix ratio {mean_ratio:.3}, \
             mean val score {mean_val:.4} over {} steps",
            chunk.len()
        );
    }
    // Does the policy condition the mix ratio on which class anchors x0?
    let last = &trace[2 * third..];
    for (name, label) in [("majority-anchored", 0u8), ("minority-anchored", 1u8)] {
        let steps: Vec<_> = last
            .iter()
            .filter(|t| train_label(&train, t.x0_index) == Some(label))
            .collect();
        if !steps.is_empty() {
            let mean_ratio: f64 =
                steps.iter().map(|t| t.action.mix_ratio).sum::<f64>() / steps.len() as f64;
            println!(
                "late {name} steps: {} with mean mix ratio {mean_ratio:.3}",
                steps.len()
            );
        }
    }
    let lengths = &artifacts.summary.episode_lengths;
    println!(
        "episode lengths: first 10 {:?}, last 10 {:?}",
        &lengths[..10.min(lengths.len())],
        &lengths[lengths.len().saturating_sub(10)..]
    );
    println!(
        "training synthetics: {} total ({} minority / {} majority)",
        artifacts.summary.synthetic_total,
        artifacts.summary.synthetic_minority,
        artifacts.summary.synthetic_majority
    );

    let synthetics = final_rollout(
        &artifacts.agent,
        &artifacts.pretrained,
        artifacts.pretrained_score,
        &cfg,
        &train,
        &val,
    )?;
    let minority = synthetics.iter().filter(|s| s.label == MINORITY).count();
    println!(
        "rollout augmentation set: {} samples ({} minority / {} majority)",
        synthetics.len(),
        minority,
        synthetics.len() - minority
    );

    let baseline = fit(&cfg.classifier, &train)?;
    let baseline_scores = evaluate(&baseline, &test)?;
    let augmented = fit(&cfg.classifier, &train.augmented(&synthetics)?)?;
    let augmented_scores = evaluate(&augmented, &test)?;
    println!(
        "test macro-F1: unaugmented {:.4} -> augmented {:.4}",
        baseline_scores.f1, augmented_scores.f1
    );

    // Learned parameters round-trip through the versioned binary format.
    let dir = tempfile::tempdir().map_err(mixann::Error::Io)?;
    let params_path = dir.path().join("mixer.params");
    artifacts.agent.save_params(&params_path)?;
    let mut reloaded = mixann::agent::Agent::new(
        2 * train.dim(),
        cfg.agent.clone(),
        *artifacts.agent.bounds(),
    )?;
    reloaded.load_params(&params_path)?;
    let probe = vec![0.5; 2 * train.dim()];
    assert_eq!(
        reloaded.greedy_raw(&probe)?,
        artifacts.agent.greedy_raw(&probe)?
    );
    println!(
        "saved and reloaded the mixer parameters ({} bytes); greedy actions match",
        std::fs::metadata(&params_path).map(|m| m.len()).unwrap_or(0)
    );
    Ok(())
}
