//! Fits the two classifier families, shows incremental updates, and
//! demonstrates that snapshots restore predictions exactly.
//!
//! ```bash
//! cargo run --example classifier_basics
//! ```

use mixann::classifiers::{evaluate, fit, Classifier, ClassifierKind, ClassifierSpec};
use mixann::data::{make_toy, split, LabeledSample, SplitSpec};

fn main() -> mixann::Result<()> {
    let dataset = make_toy(400, 40, 3, 1.0, 11)?;
    let spec = SplitSpec {
        test_fraction: 0.2,
        val_fraction_of_train: 0.2,
        stratified: true,
        seed: 1,
    };
    let (train, _val, test) = split(&dataset, &spec)?;

    let knn_spec = ClassifierSpec::knn(10, 0);
    let mlp_spec = ClassifierSpec {
        kind: ClassifierKind::Mlp,
        mlp_hidden: vec![128, 64],
        mlp_epochs_initial: 60,
        seed: 0,
        ..ClassifierSpec::default()
    };

    for spec in [knn_spec, mlp_spec] {
        let mut state = fit(&spec, &train)?;
        let scores = evaluate(&state, &test)?;
        println!(
            "{}: test precision {:.4}, recall {:.4}, f1 {:.4} (pool {})",
            spec.kind_name(),
            scores.precision,
            scores.recall,
            scores.f1,
            state.pool_len()
        );

        // Snapshot, push a burst of synthetic minorities, restore.
        let snapshot = state.clone();
        let probe = vec![3.0, 0.0];
        let before = state.predict_proba(&probe)?;
        let burst: Vec<LabeledSample> = (0..10)
            .map(|_| LabeledSample { features: probe.clone(), label: 1 })
            .collect();
        state.update(&burst)?;
        let after = state.predict_proba(&probe)?;
        let restored = snapshot.predict_proba(&probe)?;
        println!(
            "  p(minority) at {probe:?}: {before:.4} -> {after:.4} after a 10-sample burst; \
             snapshot still answers {restored:.4}"
        );
        assert_eq!(before.to_bits(), restored.to_bits());
    }
    Ok(())
}
