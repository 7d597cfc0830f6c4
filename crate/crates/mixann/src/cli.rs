//! Command implementations behind the thin `mixann` binary: benchmark runs,
//! hyperparameter sweeps, reward ablations, and 2-D decision-boundary
//! exports. Every command is a pure function of its config file and flags;
//! reruns produce byte-identical artifacts. Files are written to a unique
//! temporary path and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classifiers::Classifier;
use crate::config::ExperimentConfigFile;
use crate::data::split;
use crate::error::{Error, Result};
use crate::metrics::MacroScores;
use crate::trainer::{
    fit_augmented, generate_augmentation, run_experiment, ExperimentReport, Method, RewardMode,
    SeedOutcome, SeedTrace,
};

/// Global flags shared by all commands.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub out_dir: Option<PathBuf>,
    pub seed_offset: u64,
}

fn load_with_overrides(config_path: &Path, overrides: &CliOverrides) -> Result<ExperimentConfigFile> {
    let mut cfg = ExperimentConfigFile::load(config_path)?;
    if let Some(out) = &overrides.out_dir {
        cfg.out_dir = Some(out.clone());
    }
    if overrides.seed_offset != 0 {
        cfg.seeds = cfg.seeds.iter().map(|s| s.wrapping_add(overrides.seed_offset)).collect();
    }
    Ok(cfg)
}

/// Writes `bytes` under `dir/name` via a unique temporary file and an
/// atomic rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

#[derive(Serialize)]
struct BenchmarkReport<'a> {
    kind: &'static str,
    config: &'a ExperimentConfigFile,
    results: &'a [ExperimentReport],
}

#[derive(Serialize)]
struct TraceLine<'a> {
    method: &'a str,
    seed: u64,
    #[serde(flatten)]
    step: &'a crate::trainer::StepTrace,
}

/// Runs every configured method and writes `report.json` and `report.txt`
/// (plus `trace.jsonl` when tracing is enabled and a policy method ran).
pub fn cmd_benchmark(config_path: &Path, overrides: &CliOverrides) -> Result<()> {
    let cfg = load_with_overrides(config_path, overrides)?;
    let dataset = cfg.build_dataset()?;
    let setup = cfg.setup();
    let out_dir = cfg.out_dir();

    let mut results = Vec::with_capacity(cfg.methods.len());
    let mut traces: Vec<(Method, Vec<SeedTrace>)> = Vec::new();
    for &method in &cfg.methods {
        let run = run_experiment(&setup, &dataset, method, cfg.trace)?;
        if !run.traces.is_empty() {
            traces.push((method, run.traces));
        }
        results.push(run.report);
    }

    let report = BenchmarkReport { kind: "benchmark", config: &cfg, results: &results };
    write_atomic(&out_dir, "report.json", serde_json::to_string_pretty(&report)?.as_bytes())?;

    let rows: Vec<(String, MacroScores)> =
        results.iter().map(|r| (r.method.clone(), r.mean)).collect();
    let table = render_table(&format!("classifier: {}", setup.train.classifier.kind_name()), &rows);
    write_atomic(&out_dir, "report.txt", table.as_bytes())?;

    if !traces.is_empty() {
        let mut lines = String::new();
        for (method, seed_traces) in &traces {
            for trace in seed_traces {
                for step in &trace.steps {
                    let line = TraceLine { method: method.name(), seed: trace.seed, step };
                    lines.push_str(&serde_json::to_string(&line)?);
                    lines.push('\n');
                }
            }
        }
        write_atomic(&out_dir, "trace.jsonl", lines.as_bytes())?;
    }
    Ok(())
}

/// The hyperparameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Maximum neighborhood size K.
    MaxNeighborhood,
    /// Hard-label threshold.
    LabelThreshold,
}

impl SweepParameter {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "K" => Ok(Self::MaxNeighborhood),
            "eta" => Ok(Self::LabelThreshold),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter {other:?}; expected K or eta"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MaxNeighborhood => "K",
            Self::LabelThreshold => "eta",
        }
    }
}

#[derive(Serialize)]
struct SweepEntry {
    value: f64,
    mean: MacroScores,
    per_seed: Vec<SeedOutcome>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    kind: &'static str,
    parameter: &'static str,
    config: &'a ExperimentConfigFile,
    entries: Vec<SweepEntry>,
}

/// Runs the policy method once per parameter value and writes `sweep.json`
/// mapping each value to its macro scores.
pub fn cmd_sweep(
    config_path: &Path,
    parameter: SweepParameter,
    values: &[f64],
    overrides: &CliOverrides,
) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let cfg = load_with_overrides(config_path, overrides)?;
    let dataset = cfg.build_dataset()?;
    let out_dir = cfg.out_dir();

    let mut entries = Vec::with_capacity(values.len());
    for &value in values {
        let mut varied = cfg.clone();
        match parameter {
            SweepParameter::MaxNeighborhood => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "K values must be positive integers, got {value}"
                    )));
                }
                varied.env.max_neighborhood = value as usize;
            }
            SweepParameter::LabelThreshold => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::InvalidConfig(format!(
                        "eta values must lie in [0, 1], got {value}"
                    )));
                }
                varied.env.label_threshold = value;
            }
        }
        let run = run_experiment(&varied.setup(), &dataset, Method::Mixann, false)?;
        entries.push(SweepEntry {
            value,
            mean: run.report.mean,
            per_seed: run.report.per_seed,
        });
    }

    let report = SweepReport { kind: "sweep", parameter: parameter.name(), config: &cfg, entries };
    write_atomic(&out_dir, "sweep.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct AblationRow {
    mode: &'static str,
    #[serde(flatten)]
    report: ExperimentReport,
}

#[derive(Serialize)]
struct AblationReport<'a> {
    kind: &'static str,
    config: &'a ExperimentConfigFile,
    results: Vec<AblationRow>,
}

/// Runs the policy method under every reward mode and writes a
/// `report.json` / `report.txt` pair with one row per mode.
pub fn cmd_ablation(config_path: &Path, overrides: &CliOverrides) -> Result<()> {
    let cfg = load_with_overrides(config_path, overrides)?;
    let dataset = cfg.build_dataset()?;
    let out_dir = cfg.out_dir();

    let mut rows = Vec::new();
    for mode in RewardMode::all() {
        let mut varied = cfg.setup();
        varied.train.reward_mode = mode;
        let run = run_experiment(&varied, &dataset, Method::Mixann, false)?;
        rows.push(AblationRow { mode: mode.name(), report: run.report });
    }

    let table_rows: Vec<(String, MacroScores)> =
        rows.iter().map(|r| (r.mode.to_string(), r.report.mean)).collect();
    let report = AblationReport { kind: "ablation", config: &cfg, results: rows };
    write_atomic(&out_dir, "report.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    let table = render_table(
        &format!("reward ablations, classifier: {}", cfg.classifier.kind_name()),
        &table_rows,
    );
    write_atomic(&out_dir, "report.txt", table.as_bytes())?;
    Ok(())
}

/// For each method: generates the augmentation set on the first seed, fits
/// the classifier on the augmented training split, and writes
/// `synthetics_<method>.csv` plus a `grid_<method>.csv` of minority
/// probabilities over the dataset's bounding box. Requires 2-D data.
pub fn cmd_case_study(config_path: &Path, overrides: &CliOverrides) -> Result<()> {
    let cfg = load_with_overrides(config_path, overrides)?;
    let dataset = cfg.build_dataset()?;
    if dataset.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: dataset.dim() });
    }
    let setup = cfg.setup();
    let out_dir = cfg.out_dir();
    let seed = setup.train.seeds[0];
    let (train, val, _test) = split(&dataset, &setup.split.with_seed(seed))?;

    let bounds = dataset.bounding_box();
    let g = cfg.grid_resolution;
    for &method in &cfg.methods {
        let synthetics = generate_augmentation(&setup, &train, &val, method, seed)?;
        let mut csv = String::from("f1,f2,label\n");
        for s in &synthetics {
            let _ = writeln!(csv, "{},{},{}", s.features[0], s.features[1], s.label);
        }
        write_atomic(&out_dir, &format!("synthetics_{}.csv", method.name()), csv.as_bytes())?;

        let classifier = fit_augmented(&setup, &train, &synthetics, seed)?;
        let mut grid = String::from("f1,f2,p_minority\n");
        for i in 0..g {
            let x = lerp(bounds[0], i, g);
            for j in 0..g {
                let y = lerp(bounds[1], j, g);
                let p = classifier.predict_proba(&[x, y])?;
                let _ = writeln!(grid, "{x},{y},{p}");
            }
        }
        write_atomic(&out_dir, &format!("grid_{}.csv", method.name()), grid.as_bytes())?;
    }
    Ok(())
}

fn lerp((lo, hi): (f64, f64), step: usize, steps: usize) -> f64 {
    lo + (hi - lo) * step as f64 / (steps - 1) as f64
}

/// Fixed-width table: one row per entry, macro precision/recall/F1 columns.
pub fn render_table(title: &str, rows: &[(String, MacroScores)]) -> String {
    let name_width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{:<name_width$}  {:>9}  {:>9}  {:>9}", "method", "precision", "recall", "f1");
    for (name, scores) in rows {
        let _ = writeln!(
            out,
            "{name:<name_width$}  {:>9.4}  {:>9.4}  {:>9.4}",
            scores.precision, scores.recall, scores.f1
        );
    }
    out
}
