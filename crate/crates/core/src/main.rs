use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graphreg::experiment::{self, Artifacts, ExperimentConfig, FigureOptions, Format};

/// Default output root when neither `--out` nor the config names a directory.
const OUT_ENV: &str = "GRAPHREG_OUT_DIR";
const FALLBACK_OUT: &str = "graphreg-out";

#[derive(Parser)]
#[command(name = "graphreg", version, about = "Regularized inference of Gaussian and Potts graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output directory; overrides the config and the GRAPHREG_OUT_DIR variable.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated seeds replacing the configured ones.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Comma-separated output formats: csv, svg.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_format)]
    format: Option<Vec<Format>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the true model and its samples.
    Generate(ConfigArg),
    /// Likelihood scan over the regularization grid.
    Scan(ConfigArg),
    /// Locate the optimal, crossing and half-gap regularization strengths.
    FindGammas(ConfigArg),
    /// Potts pseudo-likelihood scan with KL divergence to the truth.
    PottsScan(ConfigArg),
    /// Metropolis sampling of the posterior over couplings.
    Posterior(ConfigArg),
    /// Regenerate the data behind one figure (2, 4, 5, 6, 8 or 9).
    ReproduceFigure { figure: u32 },
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "csv" => Ok(Format::Csv),
        "svg" => Ok(Format::Svg),
        other => Err(format!("unknown format {other:?}; expected csv or svg")),
    }
}

fn out_dir(common: &Common, configured: Option<&Path>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| configured.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT))
}

fn load(path: &Path, common: &Common) -> graphreg::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seeds) = &common.seeds {
        cfg.sampling.seeds = seeds.clone();
    }
    if let Some(formats) = &common.format {
        cfg.outputs.formats = formats.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> graphreg::Result<Artifacts> {
    type Runner = fn(&ExperimentConfig, &Path) -> graphreg::Result<Artifacts>;
    let (arg, runner): (&ConfigArg, Runner) = match &cli.command {
        Command::Generate(a) => (a, experiment::run_generate),
        Command::Scan(a) => (a, experiment::run_gaussian_scan),
        Command::FindGammas(a) => (a, experiment::run_find_gammas),
        Command::PottsScan(a) => (a, experiment::run_potts_scan),
        Command::Posterior(a) => (a, experiment::run_posterior),
        Command::ReproduceFigure { figure } => {
            let opts =
                FigureOptions { seeds: cli.common.seeds.clone(), formats: cli.common.format.clone().unwrap_or_else(|| FigureOptions::default().formats) };
            return experiment::reproduce_figure(*figure, &out_dir(&cli.common, None), &opts);
        }
    };
    let cfg = load(&arg.config, &cli.common)?;
    log::info!("config hash {}", cfg.hash());
    runner(&cfg, &out_dir(&cli.common, cfg.outputs.directory.as_deref()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(artifacts) => {
            for f in &artifacts.files {
                println!("{}", f.display());
            }
            if !artifacts.failed_seeds.is_empty() {
                log::warn!("failed seeds: {:?}", artifacts.failed_seeds);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
