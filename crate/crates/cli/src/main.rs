//! Command-line front end: simulate series, run replication
//! experiments, bootstrap the Hill estimator, validate inputs, and
//! manage cached oracle values.
//!
//! Exit codes: 0 on success, 1 when a tolerance check fails, 2 on
//! configuration or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cluster_extremes::blocks::Blocking;
use cluster_extremes::harness::{
    cached_limit_covariance, run_experiment, ExperimentConfig, OracleCache,
};
use cluster_extremes::processes::TailChainModel;
use cluster_extremes::resample::{block_bootstrap_hill, write_bootstrap_csv};
use cluster_extremes::standardize::{ratio_excesses, threshold_from_quantile};
use cluster_extremes::{Family, GeneratorSpec, RawSeries, ScaleConvention};

#[derive(Parser)]
#[command(name = "cluster-extremes", version, about = "Block empirical processes for extremes of stationary series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a series from a built-in family and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a replication experiment from a JSON config and write reports.
    Analyze(AnalyzeArgs),
    /// Bootstrap the Hill estimator over disjoint blocks.
    Bootstrap(BootstrapArgs),
    /// Validate a config file or a series CSV without running anything.
    Validate(ValidateArgs),
    /// Compute (and cache) tail-chain oracle values for a config.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Family: iid_uniform, iid_pareto, armax_frechet or moving_maxima.
    #[arg(long)]
    family: String,
    /// Extreme value index for iid_pareto.
    #[arg(long)]
    gamma: Option<f64>,
    /// Dependence parameter for armax_frechet.
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated weights for moving_maxima.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.csv, zn_values.csv and diagnostics.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Input series CSV (single `value` column).
    #[arg(long)]
    input: PathBuf,
    /// Explicit ratio threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Or: target exceedance probability for an empirical threshold.
    #[arg(long)]
    target_v: Option<f64>,
    #[arg(long)]
    block_length: usize,
    #[arg(long, default_value_t = 1)]
    small_block_length: usize,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON experiment configuration to check.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Series CSV to check.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// JSON experiment configuration (must include an oracle section).
    #[arg(long)]
    config: PathBuf,
    /// Key-value cache file (JSON object); created if missing.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn parse_family(args: &SimulateArgs) -> anyhow::Result<Family> {
    let family = match args.family.as_str() {
        "iid_uniform" => Family::IidUniform,
        "iid_pareto" => Family::IidPareto {
            gamma: args
                .gamma
                .ok_or_else(|| anyhow::anyhow!("iid_pareto needs --gamma"))?,
        },
        "armax_frechet" => Family::ArmaxFrechet {
            alpha: args
                .alpha
                .ok_or_else(|| anyhow::anyhow!("armax_frechet needs --alpha"))?,
        },
        "moving_maxima" => {
            let text = args
                .weights
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("moving_maxima needs --weights"))?;
            let weights = text
                .split(',')
                .map(|w| w.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| anyhow::anyhow!("bad weight list {text:?}: {e}"))?;
            Family::MovingMaxima { weights }
        }
        other => anyhow::bail!("unknown family {other:?}"),
    };
    family.validate()?;
    Ok(family)
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let spec = GeneratorSpec {
        family: parse_family(args)?,
        n: args.n,
        seed: args.seed,
    };
    let series = cluster_extremes::simulate(&spec)?;
    series.to_csv(&args.output)?;
    eprintln!("wrote {} values to {}", series.len(), args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(args: &AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let report = run_experiment(&cfg)?;
    if let Some(dir) = &args.output_dir {
        report.write_all(dir)?;
    }
    print!("{}", report.render_text());
    Ok(if report.overall_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_bootstrap(args: &BootstrapArgs) -> anyhow::Result<ExitCode> {
    let series = RawSeries::from_csv(&args.input)?;
    let threshold = match (args.threshold, args.target_v) {
        (Some(u), None) => u,
        (None, Some(v)) => threshold_from_quantile(&series, v, ScaleConvention::HeavyTail)?.0,
        _ => anyhow::bail!("give exactly one of --threshold and --target-v"),
    };
    let row = ratio_excesses(&series, threshold)?;
    let blocking = Blocking::new(row.len(), args.block_length, args.small_block_length)?;
    let result = block_bootstrap_hill(&row, &blocking, args.resamples, args.seed)?;
    write_bootstrap_csv(&args.output, &result)?;
    println!("estimate: {}", result.estimate);
    println!(
        "resamples: {} valid, {} invalid",
        result.replicates.len() - result.invalid,
        result.invalid
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: &ValidateArgs) -> anyhow::Result<ExitCode> {
    match (&args.config, &args.input) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::from_json(&text)?;
            println!("config ok: {}", path.display());
        }
        (None, Some(path)) => {
            let series = RawSeries::from_csv(path)?;
            println!("series ok: {} values", series.len());
        }
        _ => anyhow::bail!("give exactly one of --config and --input"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: &OracleArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let oracle = cfg
        .oracle
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("config has no oracle section"))?;
    let model = TailChainModel::new(cfg.generator.clone(), oracle.scale)?;

    let mut cache = match &args.cache {
        Some(path) => OracleCache::load(path)?,
        None => OracleCache::default(),
    };

    println!("theta = {}", model.theta_true());
    let functionals = cfg
        .functionals
        .iter()
        .map(|f| f.build())
        .collect::<Result<Vec<_>, _>>()?;
    for (i, f) in functionals.iter().enumerate() {
        for g in &functionals[i..] {
            let v = cached_limit_covariance(
                &mut cache,
                &model,
                f.as_ref(),
                g.as_ref(),
                oracle.draws,
                oracle.seed,
            );
            println!("cov({},{}) = {v}", f.name(), g.name());
        }
    }
    if let Some(k) = cfg.cluster_size_max_k {
        for (i, p) in model.cluster_size_law(k).iter().enumerate() {
            println!("cluster_size({}) = {p}", i + 1);
        }
    }
    if let Some(path) = &args.cache {
        cache.save(path)?;
        eprintln!("cache: {} entries in {}", cache.len(), path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
