//! `nfalias` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric or resource
//! error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(nfalias::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<nfalias::Error> for CliError {
    fn from(e: nfalias::Error) -> Self {
        match e {
            nfalias::Error::Parameter(msg) => CliError::Config(msg),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nfalias",
    version,
    about = "Near-field aliasing analysis of sampled antenna arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Square region resolution; overrides `region.resolution`.
    #[arg(long, global = true)]
    resolution: Option<usize>,

    /// Also emit the continuous-space reference AF.
    #[arg(long, global = true)]
    continuous: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Discrete (and optionally continuous) AF over the region.
    Af,
    /// Matched spectrum for each tested location.
    Spectrum,
    /// Closed-form and numeric band limits for each tested location.
    Bandlimit,
    /// AFR boundary of the source over the region.
    Afr,
    /// Normalized ULA eye dimensions.
    Eye,
    /// Aliasing-safe verdict and safe spacing for an operating domain.
    Asod,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Af => "af",
            Command::Spectrum => "spectrum",
            Command::Bandlimit => "bandlimit",
            Command::Afr => "afr",
            Command::Eye => "eye",
            Command::Asod => "asod",
        }
    }
}

/// Run-time switches that are not part of the scenario.
#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub resolution: Option<usize>,
    pub continuous: bool,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let scenario = Scenario::load(&config)?;
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    let opts = Options {
        out: cli
            .out
            .or_else(|| scenario.raw.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        resolution: cli.resolution,
        continuous: cli.continuous,
    };
    std::fs::create_dir_all(&opts.out)?;
    commands::run(cli.command, &scenario, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nfalias: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
