//! Batch command-line front end.
//!
//! Each subcommand reads an INI configuration (see [`config`]), runs one
//! simulation or analysis and writes CSV tables plus a `key: value` summary
//! into the output directory. Identical inputs give byte-identical files.

mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::error::Error;
use config::{ConfigError, RunConfig};

/// Environment variable consulted when `--config` is absent.
pub const CONFIG_ENV: &str = "GRAVSIM_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_COVERAGE: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(String),

    #[error(transparent)]
    Sim(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io(_) => EXIT_OTHER,
            CliError::Sim(e) => match e {
                Error::InvalidParameter(_)
                | Error::InvalidSequence(_)
                | Error::TimeOrder { .. }
                | Error::StepSize { .. }
                | Error::Resolution(_)
                | Error::DegenerateDrive
                | Error::EliminationSingularity => EXIT_CONFIG,
                Error::InsufficientData(_) | Error::InvalidState { .. } => EXIT_DATA,
                Error::FitFailure(_) | Error::AmbiguousFringe(_) => EXIT_CONVERGENCE,
                Error::Coverage(_) => EXIT_COVERAGE,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gravsim", version, about = "Atom-interferometer gravimeter simulation")]
pub struct Cli {
    /// Configuration file (falls back to $GRAVSIM_CONFIG, then built-in defaults).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Random seed; overrides run.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory; overrides run.out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for Monte-Carlo runs. Does not change results.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,

    /// Use the piecewise sensitivity function instead of the odd one.
    #[arg(long, global = true)]
    pub paper_gs: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Single-pulse excited population: closed form against the RK4 oracle.
    Rabi,
    /// Chirp scan and gravity fit.
    Fringe,
    /// Chirp scan over the configured grid (ignores scan.betas).
    Gsweep,
    /// Allan deviation of a time-series file.
    Allan,
    /// Sensitivity function g_s(t) and transfer function |G(ω)|.
    Sensitivity,
    /// Phase variance from a PSD table, optionally checked by Monte-Carlo.
    PsdVariance,
    /// Synthesize a Gaussian time series with a given PSD.
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rabi => "rabi",
            Command::Fringe => "fringe",
            Command::Gsweep => "gsweep",
            Command::Allan => "allan",
            Command::Sensitivity => "sensitivity",
            Command::PsdVariance => "psd-variance",
            Command::Synth => "synth",
        }
    }
}

/// Options shared by all commands after flag and environment resolution.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub paper_gs: bool,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(p) => Ok(RunConfig::load(&p)?),
        None => Ok(RunConfig::empty()),
    }
}

/// Run a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = load_config(cli)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config.get_or::<u64>("run.seed", 0)?,
    };
    config.set_resolved("run.seed", seed);
    let out = match &cli.out {
        Some(o) => o.clone(),
        None => PathBuf::from(config.get_unrecorded("run.out").unwrap_or(".")),
    };
    if cli.workers == 0 {
        return Err(CliError::Config(ConfigError::Value {
            location: "command line".into(),
            key: "--workers".into(),
            msg: "must be at least 1".into(),
        }));
    }
    let opts = RunOptions {
        seed,
        out,
        workers: cli.workers,
        paper_gs: cli.paper_gs,
    };
    commands::dispatch(cli.command, &config, &opts)
}

/// Entry point for the binary: runs and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("gravsim {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
