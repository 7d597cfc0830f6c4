//! Generates the 2-D toy dataset, splits it, and round-trips it through
//! CSV.
//!
//! ```bash
//! cargo run --example toy_data
//! ```

use mixann::data::{load_csv, make_toy, save_csv, split, SplitSpec, MINORITY};

fn main() -> mixann::Result<()> {
    let dataset = make_toy(600, 30, 3, 1.0, 7)?;
    println!(
        "generated {} samples in {} dimensions ({} minorities, {:.1}% of the data)",
        dataset.len(),
        dataset.dim(),
        dataset.count_label(MINORITY),
        100.0 * dataset.count_label(MINORITY) as f64 / dataset.len() as f64
    );
    let bounds = dataset.bounding_box();
    println!(
        "bounding box: x in [{:.2}, {:.2}], y in [{:.2}, {:.2}]",
        bounds[0].0, bounds[0].1, bounds[1].0, bounds[1].1
    );

    let spec = SplitSpec {
        test_fraction: 0.2,
        val_fraction_of_train: 0.2,
        stratified: true,
        seed: 0,
    };
    let (train, val, test) = split(&dataset, &spec)?;
    for (name, part) in [("train", &train), ("val", &val), ("test", &test)] {
        println!(
            "{name:5}: {:3} samples, {:2} minorities",
            part.len(),
            part.count_label(MINORITY)
        );
    }

    let dir = tempfile::tempdir().map_err(mixann::Error::Io)?;
    let path = dir.path().join("toy.csv");
    save_csv(&dataset, &path)?;
    let reloaded = load_csv(&path)?;
    println!(
        "csv round-trip: {} bytes, reload identical: {}",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        reloaded == dataset
    );
    Ok(())
}
