//! Command-line experiment runner for the `orlicz-lab` toolkit.
//!
//! Every command reads one TOML experiment file (see the README for the
//! format), validates it completely, and writes CSV tables and OLF1 field
//! files into the output directory.

pub mod commands;
pub mod config;
pub mod expr;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Compute(String),
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    ConfigError = 1,
    HypothesisFailed = 2,
    NotConverged = 3,
    VerificationFailed = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// The more severe of two outcomes, by exit code.
    pub fn worst(self, other: Status) -> Status {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "orlicz-lab",
    version,
    about = "Orlicz-Laplace solver and regularity verification runner"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for randomly placed ball pairs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check closeness and ratio hypotheses for every (phi, psi) pair.
    Check(CommonArgs),
    /// Solve the regularized Dirichlet problem.
    Solve(CommonArgs),
    /// Run the Caccioppoli suite and the reverse-Hölder probe.
    Verify(CommonArgs),
    /// Run the pointwise Cordes probe on a closed-form field.
    Probe(CommonArgs),
    /// Convert result tables into long-format plot data.
    Plotdata(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Check(a) | Command::Solve(a) | Command::Verify(a) | Command::Probe(a) | Command::Plotdata(a) => a,
        }
    }
}

/// Runs a parsed command on a dedicated thread pool and maps the outcome to
/// an exit status, printing errors to stderr.
pub fn run(cli: &Cli) -> Status {
    let args = cli.command.args();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = args.threads {
        builder = builder.num_threads(k.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return Status::ConfigError;
        }
    };
    let result = pool.install(|| -> Result<Status, CliError> {
        let cfg = ExperimentConfig::from_file(&args.config)?;
        match &cli.command {
            Command::Check(_) => commands::check(&cfg, &args.out),
            Command::Solve(_) => commands::solve(&cfg, &args.out),
            Command::Verify(_) => commands::verify(&cfg, &args.out, args.seed),
            Command::Probe(_) => commands::probe(&cfg, &args.out),
            Command::Plotdata(_) => commands::plotdata(&cfg, &args.out),
        }
    });
    match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            Status::ConfigError
        }
    }
}
