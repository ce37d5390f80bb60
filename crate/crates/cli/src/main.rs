//! Command-line driver for the forward/inverse Helmholtz laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure
//! (divergence, near-eigenvalue, overflow), 4 data mismatch.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::Config;

#[derive(Parser)]
#[command(name = "helmlab", about = "Forward and inverse nonlinear Helmholtz workflows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for JSON/CSV/PGM artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized verification sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the nonlinear boundary value problem, with an optional
    /// refinement study.
    Forward,
    /// Simulate second-order DN data over a frequency plan.
    Simulate,
    /// Recover the potential from a simulated dataset.
    Reconstruct,
    /// Measure the exponential decay of CGO correction norms.
    CgoDecay,
    /// Runge approximation residual ladder.
    Runge,
    /// Cavity discrimination demo.
    Cavity,
    /// Verify the Maxwell amplitude identities.
    MaxwellVerify,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::Config("config error: --config PATH is required".into())
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("config error: cannot read '{}': {e}", path.display()))
    })?;
    let cfg = Config::parse(&text)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("config error: thread pool: {e}")))?;
    }
    match cli.command {
        Command::Forward => commands::cmd_forward(&cfg, &cli.out),
        Command::Simulate => commands::cmd_simulate(&cfg, &cli.out),
        Command::Reconstruct => commands::cmd_reconstruct(&cfg, &cli.out),
        Command::CgoDecay => commands::cmd_cgo_decay(&cfg, &cli.out),
        Command::Runge => commands::cmd_runge(&cfg, &cli.out),
        Command::Cavity => commands::cmd_cavity(&cfg, &cli.out),
        Command::MaxwellVerify => commands::cmd_maxwell_verify(&cfg, &cli.out, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("helmlab: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
