//! Library-level benchmark: runs several augmentation methods across seeds
//! and prints the aggregated table.
//!
//! ```bash
//! cargo run --release --example benchmark
//! ```

use mixann::agent::AgentConfig;
use mixann::classifiers::ClassifierSpec;
use mixann::cli::render_table;
use mixann::data::make_toy;
use mixann::env::EnvConfig;
use mixann::metrics::MacroScores;
use mixann::trainer::{
    run_experiment, ExperimentSetup, Method, OversampleSettings, SplitSettings, TrainConfig,
};

fn main() -> mixann::Result<()> {
    let dataset = make_toy(600, 30, 3, 1.0, 2024)?;
    let setup = ExperimentSetup {
        split: SplitSettings {
            test_fraction: 0.2,
            val_fraction_of_train: 0.2,
            stratified: true,
        },
        train: TrainConfig {
            classifier: ClassifierSpec::knn(10, 0),
            episodes: 100,
            env: EnvConfig { max_steps: 25, ..EnvConfig::default() },
            agent: AgentConfig {
                actor_lr: 1e-3,
                critic_lr: 1e-2,
                noise_sigma: 1.2,
                noise_sigma_final: 0.1,
                updates_per_step: 2,
                ..AgentConfig::default()
            },
            seeds: vec![0, 1, 2, 3, 4],
            ..TrainConfig::default()
        },
        oversample: Some(OversampleSettings { n_synthetic: 300, k_neighbors: 5 }),
    };

    let methods = [
        Method::None,
        Method::Random,
        Method::Smote,
        Method::BorderlineSmote,
        Method::Adasyn,
        Method::Mixboost,
        Method::Mixann,
    ];
    let mut rows: Vec<(String, MacroScores)> = Vec::new();
    for method in methods {
        let run = run_experiment(&setup, &dataset, method, false)?;
        println!(
            "{:<17} done: {} synthetics across {} seeds",
            method.name(),
            run.report.synthetics_total,
            run.report.per_seed.len()
        );
        rows.push((method.name().to_string(), run.report.mean));
    }
    println!();
    print!("{}", render_table("5-seed means, knn classifier", &rows));
    Ok(())
}
