//! Exports decision-boundary grids for the 2-D toy dataset: for each
//! method, a CSV of generated synthetics and a CSV of minority
//! probabilities over the bounding box, ready for external plotting.
//!
//! ```bash
//! cargo run --release --example case_study
//! ```

use std::path::Path;

use mixann::cli::{cmd_case_study, CliOverrides};

fn main() -> mixann::Result<()> {
    let dir = tempfile::tempdir().map_err(mixann::Error::Io)?;
    let config_path = dir.path().join("case_study.json");
    std::fs::write(
        &config_path,
        r#"{
            "dataset": {"kind": "toy", "majority": 600, "minority": 30, "clusters": 3, "spread": 1.0, "seed": 2024},
            "split": {"test_fraction": 0.2, "val_fraction_of_train": 0.2},
            "methods": ["none", "smote", "mixann"],
            "oversample": {"n_synthetic": 300, "k_neighbors": 5},
            "classifier": {"kind": "knn", "knn_k": 10},
            "train": {"episodes": 100},
            "env": {"max_steps": 25},
            "agent": {
                "actor_lr": 1e-3, "critic_lr": 1e-2,
                "noise_sigma": 1.2, "noise_sigma_final": 0.1,
                "updates_per_step": 2
            },
            "seeds": [0],
            "grid_resolution": 200
        }"#,
    )
    .map_err(mixann::Error::Io)?;

    let out = Path::new("target/case_study");
    let overrides = CliOverrides { out_dir: Some(out.to_path_buf()), seed_offset: 0 };
    cmd_case_study(&config_path, &overrides)?;

    println!("wrote plot-ready CSVs to {}:", out.display());
    for entry in std::fs::read_dir(out).map_err(mixann::Error::Io)? {
        let entry = entry.map_err(mixann::Error::Io)?;
        let lines = std::fs::read_to_string(entry.path())
            .map(|s| s.lines().count())
            .unwrap_or(0);
        println!("  {} ({} lines)", entry.file_name().to_string_lossy(), lines);
    }
    println!("plot idea: scatter the synthetics over a p_minority heat map of the grid file");
    Ok(())
}
