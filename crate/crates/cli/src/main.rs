mod commands;
mod hardpair;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

pub const DEFAULT_SEED: u64 = 0;

/// Stability under distribution shift: plug-in estimates, threshold sweeps,
/// convergence experiments, hard-pair checks, deviation probabilities and
/// queueing batches.
#[derive(Debug, Parser)]
#[command(name = "shiftstab", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random stream of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for result files and the run manifest.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Format of tabular output.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plug-in stability of a cost or risk sample at one threshold.
    Estimate(commands::EstimateArgs),
    /// Plug-in stability over an even grid of thresholds.
    Sweep(commands::SweepArgs),
    /// Mean squared error of the estimator across sample sizes.
    Converge(commands::ConvergeArgs),
    /// Build a hard pair and check its inequalities numerically.
    Hardpair(hardpair::HardpairArgs),
    /// Simulate a multi-class queue and estimate the stability of its cost.
    Queue(commands::QueueArgs),
    /// Monte-Carlo deviation probability of a random walk.
    Cramer(commands::CramerArgs),
}

/// Exit codes of the command-line contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const INFEASIBLE_THRESHOLD: u8 = 2;
    pub const INFEASIBLE_CONSTRUCTION: u8 = 3;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<shiftstab::Error>() {
                Some(shiftstab::Error::Infeasible(_)) => exit::INFEASIBLE_CONSTRUCTION,
                _ => exit::USAGE,
            };
            ExitCode::from(code)
        }
    }
}
