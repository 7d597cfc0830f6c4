//! Thin CLI over the library commands. All behavior lives in
//! `mixann::cli`; this binary only parses flags and maps errors to exit
//! codes.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixann::cli::{self, CliOverrides, SweepParameter};

#[derive(Parser)]
#[command(name = "mixann", version, about = "Mix-up augmentation benchmarks for imbalanced classification")]
struct Cli {
    /// Experiment config file (strict JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding the config's `out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Added to every seed in the config's seed list.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,

    /// Worker threads for per-seed parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method and write report.json / report.txt.
    Benchmark,
    /// Rerun the policy method across parameter values; write sweep.json.
    Sweep {
        /// Which hyperparameter to vary: K or eta.
        #[arg(long)]
        param: String,
        /// Comma-separated values to sweep over.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Run the policy under each reward mode; write a per-mode report.
    Ablation,
    /// Export synthetics and decision-boundary grids for 2-D data.
    CaseStudy,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> mixann::Result<()> {
    let config = cli.config.ok_or_else(|| {
        mixann::Error::InvalidConfig("--config <PATH> is required".into())
    })?;
    if cli.jobs == 0 {
        return Err(mixann::Error::InvalidConfig("--jobs must be at least 1".into()));
    }
    // Per-seed units are seeded independently, so results do not depend on
    // the worker count.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    let overrides = CliOverrides { out_dir: cli.out, seed_offset: cli.seed_offset };
    match cli.command {
        Command::Benchmark => cli::cmd_benchmark(&config, &overrides),
        Command::Sweep { param, values } => {
            cli::cmd_sweep(&config, SweepParameter::parse(&param)?, &values, &overrides)
        }
        Command::Ablation => cli::cmd_ablation(&config, &overrides),
        Command::CaseStudy => cli::cmd_case_study(&config, &overrides),
    }
}
