use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ipdft::config::ExperimentConfig;
use ipdft::experiments;
use ipdft::persistence::Table;
use ipdft::Error;

/// Runs the estimator characterisation studies and writes CSV.
#[derive(Debug, Parser)]
#[command(name = "ipdft-grid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Worst-phase systematic error over record length and cycles in range.
    Fig1(Common),
    /// Monte Carlo noise study against the Cramér–Rao bounds.
    Fig3(Common),
    /// Amplitude errors under harmonic distortion, with and without prefilter.
    Table1(Common),
    /// Phase errors under harmonic distortion, with and without prefilter.
    Table2(Common),
    /// Settle times of the streaming loop after amplitude and phase steps.
    Transient(Common),
    /// Harmonics, noise and drift through the prefiltered loop.
    Combined(Common),
    /// One-shot estimation on a raw sample record.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Base seed for the noise generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Shrink grids and realization counts tenfold.
    #[arg(long)]
    quick: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    /// Raw sample file; overrides `[estimate] input`.
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Exit status for a failure: 2 for configuration and input problems, 3 when
/// estimation itself fails, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return 1;
    };
    match e {
        Error::Config(_)
        | Error::InvalidOrder(_)
        | Error::RecordTooShort { .. }
        | Error::InvalidSignal(_)
        | Error::InvalidTemplate(_)
        | Error::Aliasing { .. }
        | Error::CorruptFile { .. } => 2,
        Error::NoSignal
        | Error::Estimation(_)
        | Error::Degenerate { .. }
        | Error::Singular { .. }
        | Error::BinOutOfRange { .. }
        | Error::Shape { .. }
        | Error::DesignFailure(_)
        | Error::InsufficientData { .. }
        | Error::Empty(_) => 3,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if common.quick {
        cfg.quick();
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.output = common.out.clone();
    }
    Ok(cfg)
}

fn seed(cfg: &ExperimentConfig, command: &str) -> Result<u64> {
    cfg.seed
        .ok_or_else(|| Error::Config(format!("{command} is a Monte Carlo run and needs --seed")))
        .map_err(Into::into)
}

fn emit(table: &Table, cfg: &ExperimentConfig) -> Result<()> {
    match &cfg.output {
        Some(path) => table.write(path).with_context(|| format!("writing {}", path.display())),
        None => table.write_to(std::io::stdout().lock()).map_err(Into::into),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fig1(c) => {
            let cfg = load(&c)?;
            emit(&experiments::run_fig1(&cfg)?.table(), &cfg)
        }
        Command::Fig3(c) => {
            let cfg = load(&c)?;
            let seed = seed(&cfg, "fig3")?;
            emit(&experiments::run_fig3(&cfg, seed)?.table(), &cfg)
        }
        Command::Table1(c) => {
            let cfg = load(&c)?;
            emit(&experiments::run_tables(&cfg)?.amplitude_table(), &cfg)
        }
        Command::Table2(c) => {
            let cfg = load(&c)?;
            emit(&experiments::run_tables(&cfg)?.phase_table(), &cfg)
        }
        Command::Transient(c) => {
            let cfg = load(&c)?;
            emit(&experiments::run_transient(&cfg)?.table(), &cfg)
        }
        Command::Combined(c) => {
            let cfg = load(&c)?;
            let seed = seed(&cfg, "combined")?;
            emit(&experiments::run_combined(&cfg, seed)?.table(), &cfg)
        }
        Command::Estimate(a) => {
            let mut cfg = load(&a.common)?;
            if a.input.is_some() {
                cfg.estimate.input = a.input;
            }
            emit(&experiments::run_estimate(&cfg)?.table(), &cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
