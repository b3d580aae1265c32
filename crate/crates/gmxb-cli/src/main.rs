//! Command-line front end for the guarantee pricing engine.
//!
//! Subcommands: `price`, `fairfee`, `bench`, `validate`, `greeks`. All
//! output is deterministic for a given configuration and seed: the CSV goes
//! to `--out` (or stdout) byte-identically across reruns, while progress and
//! runtimes go to stderr.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 validation threshold failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;
mod presets;

/// CLI failure, carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Threshold(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Engine errors raised while building inputs are configuration errors.
    pub fn from_engine_config(e: gmxb::EngineError) -> Self {
        CliError::Config(e.to_string())
    }

    /// Engine errors raised while solving are numerical failures, except for
    /// strategy/solver mismatches which are configuration mistakes.
    pub fn from_engine_solve(e: gmxb::EngineError) -> Self {
        match e {
            gmxb::EngineError::UnsupportedStrategy(_) | gmxb::EngineError::Parameter(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Threshold(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Threshold(m) => write!(f, "validation failed: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "gmxb", version, about = "Variable-annuity guarantee pricing engine")]
struct Cli {
    /// Worker threads for the solvers (defaults to the logical CPU count).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price one contract with the configured solver.
    Price(RunArgs),
    /// Solve for the fair guarantee fee.
    Fairfee(RunArgs),
    /// Reproduce a built-in benchmark table (1-4).
    Bench(BenchArgs),
    /// Cross-check the quadrature solver against Monte Carlo and the PDE.
    Validate(RunArgs),
    /// Delta and Gamma via the likelihood method and bump-and-reprice.
    Greeks(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path overrides, e.g. --set market.rate=0.03
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark table number (1-4).
    #[arg(long)]
    table: u8,
    /// Dotted-path overrides applied to every cell's configuration.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // A failed build means a pool already exists; that is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let outcome = match &cli.command {
        Command::Price(args) => commands::price(args),
        Command::Fairfee(args) => commands::fairfee(args),
        Command::Bench(args) => commands::bench(args),
        Command::Validate(args) => commands::validate(args),
        Command::Greeks(args) => commands::greeks(args),
    };
    match outcome {
        Ok(report) => {
            eprint!("{}", report.summary);
            let dest = match &cli.command {
                Command::Bench(a) => a.out.clone(),
                Command::Price(a)
                | Command::Fairfee(a)
                | Command::Validate(a)
                | Command::Greeks(a) => a.out.clone(),
            };
            match dest {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &report.csv) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(3);
                    }
                }
                None => print!("{}", report.csv),
            }
            if let Some(msg) = report.failure {
                eprintln!("{}", CliError::Threshold(msg));
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
