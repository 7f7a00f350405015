//! `magnon`: runs the figure sweeps and validation checks and writes CSV.
//!
//! Exit codes: 0 success, 1 runtime failure or failed oracle check,
//! 2 configuration error, 3 chain truncation failure.

mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use magnon_core::Error as CoreError;

use config::{ConfigError, Experiment, Resolved, RunConfig};

#[derive(Parser)]
#[command(name = "magnon", version, about = "Central-spin quantum memory simulator")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Experiment id; overrides the config file.
    #[arg(long, global = true, value_enum)]
    experiment: Option<Experiment>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the experiment named in the config or by --experiment.
    Run,
    /// Leakage factor against polarisation.
    Fig2a,
    /// Collective coupling against nuclear Zeeman energy.
    Fig2b,
    /// Optimised write/read fidelity against polarisation.
    Fig2c,
    /// Transfer fidelity against quadrupolar inhomogeneity.
    Fig2d,
    /// Fourier coefficients of the modulation function.
    PulseSpectrum,
    /// Brute-force validation table.
    OracleCheck,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        match self {
            Command::Run => None,
            Command::Fig2a => Some(Experiment::Fig2a),
            Command::Fig2b => Some(Experiment::Fig2b),
            Command::Fig2c => Some(Experiment::Fig2c),
            Command::Fig2d => Some(Experiment::Fig2d),
            Command::PulseSpectrum => Some(Experiment::PulseSpectrum),
            Command::OracleCheck => Some(Experiment::OracleCheck),
        }
    }
}

fn resolve(cli: &Cli) -> Result<Resolved, ConfigError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let from_command = cli.command.and_then(Command::experiment);
    let experiment = match (from_command, cli.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError(format!("subcommand {} conflicts with --experiment {}", a.name(), b.name())))
        }
        (a, b) => a.or(b),
    };
    Resolved::new(cfg, experiment, cli.seed, cli.out.clone())
}

fn header(cfg: &Resolved) -> String {
    format!(
        "# experiment: {}\n# config_sha256: {}\n# seed: {}\n# version: magnon {}\n",
        cfg.experiment.name(),
        cfg.hash(),
        cfg.seed,
        env!("CARGO_PKG_VERSION"),
    )
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = resolve(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let output = experiments::run(&cfg)?;
    let text = header(&cfg) + &output.body;
    if let Some(report) = &output.report {
        print!("{report}");
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None if output.report.is_none() => print!("{text}"),
        None => {}
    }
    Ok(output.passed)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            match e {
                CoreError::TruncationExceeded { .. } | CoreError::TruncationCap { .. } => return 3,
                CoreError::InvalidParameter { .. } => return 2,
                _ => {}
            }
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
