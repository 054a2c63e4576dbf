use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Serialize;
use shiftstab::convergence::{run_convergence, ConvergenceConfig};
use shiftstab::io::{
    read_sample, write_convergence, write_path_costs, write_sweep, PathCostRow, RunManifest, SweepRow,
};
use shiftstab::queuesim::{run_batch, PolicyKind, QueueConfig, Scenario};
use shiftstab::{
    cramer_probability, estimate_stability, sweep, Boundary, CramerEstimate, CramerSpec, DualSolution, ParametricCost,
    Stability, DEFAULT_TOL,
};

use crate::output::{json_bytes, Format, Sink};
use crate::{exit, Cli, Command, DEFAULT_SEED};

pub fn run(cli: Cli) -> Result<u8> {
    let global = cli.global;
    let seed = global.seed.unwrap_or(DEFAULT_SEED);
    let version = env!("CARGO_PKG_VERSION");
    let (name, args) = match &cli.command {
        Command::Estimate(a) => ("estimate", serde_json::to_value(a)?),
        Command::Sweep(a) => ("sweep", serde_json::to_value(a)?),
        Command::Converge(a) => ("converge", serde_json::to_value(a)?),
        Command::Hardpair(a) => ("hardpair", serde_json::to_value(a)?),
        Command::Queue(a) => ("queue", serde_json::to_value(a)?),
        Command::Cramer(a) => ("cramer", serde_json::to_value(a)?),
    };
    let manifest_seed = match &cli.command {
        Command::Converge(a) => global.seed.unwrap_or(load_convergence_config(&a.config)?.seed),
        _ => seed,
    };
    let manifest = RunManifest::new(name, manifest_seed, version)
        .with_parameter("args", args)
        .with_parameter("format", format_name(global.format));
    let mut sink = Sink::new(global.out_dir, global.format, manifest)?;
    let code = match cli.command {
        Command::Estimate(a) => estimate(a, &mut sink)?,
        Command::Sweep(a) => run_sweep(a, &mut sink)?,
        Command::Converge(a) => converge(a, global.seed, &mut sink)?,
        Command::Hardpair(a) => crate::hardpair::run(a, &mut sink)?,
        Command::Queue(a) => queue(a, seed, &mut sink)?,
        Command::Cramer(a) => cramer(a, seed, &mut sink)?,
    };
    sink.finish()?;
    Ok(code)
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(std::io::stdin().lock()));
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(BufReader::new(file)))
}

fn load_sample(path: &Path) -> Result<shiftstab::CostSample> {
    read_sample(open_input(path)?).with_context(|| format!("reading {}", path.display()))
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    /// CSV with a `cost` column, or a `risk` column with optional `group`;
    /// `-` reads stdin.
    #[arg(long)]
    pub input: PathBuf,
    /// Threshold y.
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    /// Newton stopping tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Serialize)]
struct EstimateReport {
    #[serde(flatten)]
    solution: DualSolution,
    n: usize,
    mean: f64,
    max: f64,
}

fn estimate(a: EstimateArgs, sink: &mut Sink) -> Result<u8> {
    let sample = load_sample(&a.input)?;
    let solution = estimate_stability(&sample, a.y, a.tol)?;
    let report = EstimateReport { solution, n: sample.len(), mean: sample.mean(), max: sample.max() };
    sink.report("estimate.json", &json_bytes(&report))?;
    Ok(match solution.boundary {
        Boundary::InfiniteOrAtMax => exit::INFEASIBLE_THRESHOLD,
        Boundary::Interior | Boundary::AtZero => exit::OK,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub y_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

fn run_sweep(a: SweepArgs, sink: &mut Sink) -> Result<u8> {
    let sample = load_sample(&a.input)?;
    let rows: Vec<SweepRow> = sweep(&sample, a.y_min, a.y_max, a.steps, a.tol)?
        .into_iter()
        .map(|(y, s)| SweepRow { y, stability: s.stability, lambda_star: s.lambda_star })
        .collect();
    match sink.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep(&mut buf, &rows)?;
            sink.primary("sweep.csv", &buf)?;
        }
        Format::Json => sink.primary("sweep.json", &json_bytes(&rows))?,
    }
    Ok(exit::OK)
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    /// JSON experiment configuration; `--seed` overrides its seed.
    #[arg(long)]
    pub config: PathBuf,
}

fn load_convergence_config(path: &Path) -> Result<ConvergenceConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: ConvergenceConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(config)
}

fn converge(a: ConvergeArgs, seed: Option<u64>, sink: &mut Sink) -> Result<u8> {
    let mut config = load_convergence_config(&a.config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    sink.parameter("config", &config);
    let result = run_convergence(&config)?;
    match sink.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_convergence(&mut buf, &result.per_size)?;
            sink.primary("convergence.csv", &buf)?;
            if sink.has_out_dir() {
                sink.primary("convergence.json", &json_bytes(&result))?;
            }
        }
        Format::Json => sink.primary("convergence.json", &json_bytes(&result))?,
    }
    Ok(exit::OK)
}

#[derive(Debug, Args, Serialize)]
pub struct QueueArgs {
    /// `baseline` or a shift scenario `1`..`5`.
    #[arg(long, default_value = "baseline", conflicts_with = "config")]
    pub scenario: String,
    /// JSON queue configuration used instead of a built-in scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `gcmu` or `fifo`; defaults to the configuration's own policy.
    #[arg(long)]
    pub policy: Option<String>,
    /// Number of independent sample paths.
    #[arg(long, default_value_t = 1000)]
    pub paths: u64,
    /// Policy whose mean cost sets the threshold `y = 2 × mean`.
    #[arg(long)]
    pub threshold_from: Option<String>,
}

#[derive(Serialize)]
struct QueueSummary {
    scenario: String,
    policy: PolicyKind,
    paths: u64,
    mean: f64,
    sd: f64,
    std_error: f64,
    threshold_policy: PolicyKind,
    threshold: f64,
    stability: Stability,
    #[serde(with = "shiftstab::io::sentinel")]
    lambda_star: f64,
    boundary: Boundary,
}

fn parse_policy(s: &str) -> Result<PolicyKind> {
    PolicyKind::parse(s).ok_or_else(|| anyhow!("unknown policy '{s}' (expected gcmu or fifo)"))
}

fn queue(a: QueueArgs, seed: u64, sink: &mut Sink) -> Result<u8> {
    let policy = a.policy.as_deref().map(parse_policy).transpose()?;
    let threshold_from = a.threshold_from.as_deref().map(parse_policy).transpose()?;
    let (label, config) = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config: QueueConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let config = match policy {
                Some(p) => config.with_policy(p),
                None => config,
            };
            ("custom".to_string(), config)
        }
        None => {
            let scenario: Scenario = a.scenario.parse()?;
            (scenario.to_string(), scenario.config(policy.unwrap_or(PolicyKind::GcMu))?)
        }
    };
    if a.paths == 0 {
        bail!("--paths must be at least 1");
    }
    let batch = run_batch(&config, a.paths, seed)?;
    let reference = threshold_from.unwrap_or(config.policy);
    let reference_mean = if reference == config.policy {
        batch.mean
    } else {
        run_batch(&config.clone().with_policy(reference), a.paths, seed)?.mean
    };
    let threshold = 2.0 * reference_mean;
    let solution = estimate_stability(&batch.costs, threshold, DEFAULT_TOL)?;

    let rows: Vec<PathCostRow> = batch
        .costs
        .values()
        .iter()
        .enumerate()
        .map(|(i, &c)| PathCostRow {
            path_id: i as u64,
            policy: config.policy.to_string(),
            scenario: label.clone(),
            cumulative_cost: c,
        })
        .collect();
    match sink.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_path_costs(&mut buf, &rows)?;
            sink.primary("path_costs.csv", &buf)?;
        }
        Format::Json => sink.primary("path_costs.json", &json_bytes(&rows))?,
    }
    let summary = QueueSummary {
        scenario: label,
        policy: config.policy,
        paths: a.paths,
        mean: batch.mean,
        sd: batch.sd,
        std_error: batch.std_error,
        threshold_policy: reference,
        threshold,
        stability: solution.stability,
        lambda_star: solution.lambda_star,
        boundary: solution.boundary,
    };
    sink.secondary("summary.json", &json_bytes(&summary))?;
    Ok(exit::OK)
}

#[derive(Debug, Args, Serialize)]
pub struct CramerArgs {
    /// `exp:RATE`, `gamma:SHAPE,RATE` or `chisq:K`.
    #[arg(long, default_value = "exp:1")]
    pub dist: String,
    /// Random-walk length.
    #[arg(long)]
    pub m: u64,
    /// Per-step threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Serialize)]
struct CramerReport {
    dist: ParametricCost,
    m: u64,
    y: f64,
    #[serde(flatten)]
    estimate: CramerEstimate,
    closed_form_i: Stability,
}

fn cramer(a: CramerArgs, seed: u64, sink: &mut Sink) -> Result<u8> {
    let dist = ParametricCost::parse(&a.dist)?;
    let spec = CramerSpec::new(a.m, a.y, a.trials)?;
    let estimate = cramer_probability(&dist, &spec, seed)?;
    let closed_form_i = dist.stability(a.y)?.stability;
    let report = CramerReport { dist, m: a.m, y: a.y, estimate, closed_form_i };
    sink.report("cramer.json", &json_bytes(&report))?;
    Ok(exit::OK)
}
