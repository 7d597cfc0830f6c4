//! Runs every classical oversampler on the toy dataset and compares how the
//! KNN classifier scores with each augmentation.
//!
//! ```bash
//! cargo run --example oversamplers
//! ```

use mixann::baselines::{
    adasyn, borderline_classify, borderline_smote, mixboost, random_oversample, smote,
    OversampleRequest, SafetyClass,
};
use mixann::classifiers::{evaluate, fit, ClassifierSpec};
use mixann::data::{make_toy, split, LabeledSample, SplitSpec, MINORITY};

fn main() -> mixann::Result<()> {
    let dataset = make_toy(600, 30, 3, 1.0, 2024)?;
    let spec = SplitSpec {
        test_fraction: 0.2,
        val_fraction_of_train: 0.2,
        stratified: true,
        seed: 0,
    };
    let (train, _val, test) = split(&dataset, &spec)?;
    let req = OversampleRequest::new(300, 5, 42);

    let classes = borderline_classify(&train, req.k_neighbors)?;
    let count = |wanted: SafetyClass| classes.iter().filter(|&&c| c == wanted).count();
    println!(
        "minority safety classes: {} safe, {} danger, {} noise",
        count(SafetyClass::Safe),
        count(SafetyClass::Danger),
        count(SafetyClass::Noise)
    );

    let classifier_spec = ClassifierSpec::knn(10, 0);
    let fitted = fit(&classifier_spec, &train)?;
    let base_scores = evaluate(&fitted, &test)?;
    println!("\n{:<17} {:>9} {:>9} {:>9} {:>11}", "method", "precision", "recall", "f1", "synthetics");
    println!(
        "{:<17} {:>9.4} {:>9.4} {:>9.4} {:>11}",
        "none", base_scores.precision, base_scores.recall, base_scores.f1, 0
    );

    let runs: Vec<(&str, Vec<LabeledSample>)> = vec![
        ("random", random_oversample(&train, &req)?),
        ("smote", smote(&train, &req)?),
        ("borderline_smote", borderline_smote(&train, &req)?),
        ("adasyn", adasyn(&train, &req)?),
        ("mixboost", mixboost(&train, &fitted, &req, 0.3)?),
    ];
    for (name, synthetics) in runs {
        let minority = synthetics.iter().filter(|s| s.label == MINORITY).count();
        let augmented = fit(&classifier_spec, &train.augmented(&synthetics)?)?;
        let scores = evaluate(&augmented, &test)?;
        println!(
            "{:<17} {:>9.4} {:>9.4} {:>9.4} {:>6}+{:<4}",
            name, scores.precision, scores.recall, scores.f1, minority,
            synthetics.len() - minority
        );
    }
    println!("\nsynthetics column: minority+majority counts in the augmentation set");
    Ok(())
}
