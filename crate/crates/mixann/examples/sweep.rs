//! Sweeps the maximum neighborhood size K and the label threshold,
//! reporting how each setting moves the policy's benchmark scores.
//!
//! ```bash
//! cargo run --release --example sweep
//! ```

use mixann::agent::AgentConfig;
use mixann::classifiers::ClassifierSpec;
use mixann::data::make_toy;
use mixann::env::EnvConfig;
use mixann::trainer::{
    run_experiment, ExperimentSetup, Method, SplitSettings, TrainConfig,
};

fn main() -> mixann::Result<()> {
    let dataset = make_toy(400, 24, 3, 1.0, 2024)?;
    let base = ExperimentSetup {
        split: SplitSettings {
            test_fraction: 0.2,
            val_fraction_of_train: 0.2,
            stratified: true,
        },
        train: TrainConfig {
            classifier: ClassifierSpec::knn(10, 0),
            episodes: 50,
            env: EnvConfig { max_steps: 20, ..EnvConfig::default() },
            agent: AgentConfig {
                actor_lr: 1e-3,
                critic_lr: 1e-2,
                noise_sigma: 1.2,
                noise_sigma_final: 0.1,
                updates_per_step: 2,
                ..AgentConfig::default()
            },
            seeds: vec![0, 1],
            ..TrainConfig::default()
        },
        oversample: None,
    };

    println!("neighborhood-size sweep (2-seed mean macro-F1):");
    for k in [5usize, 10, 15, 20, 25] {
        let mut setup = base.clone();
        setup.train.env.max_neighborhood = k;
        let run = run_experiment(&setup, &dataset, Method::Mixann, false)?;
        println!("  K = {k:>2}: f1 {:.4}", run.report.mean.f1);
    }

    println!("label-threshold sweep (2-seed mean macro-F1):");
    for eta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut setup = base.clone();
        setup.train.env.label_threshold = eta;
        let run = run_experiment(&setup, &dataset, Method::Mixann, false)?;
        println!("  eta = {eta:.1}: f1 {:.4}", run.report.mean.f1);
    }
    Ok(())
}
