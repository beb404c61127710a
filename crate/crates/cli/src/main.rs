//! `qconn`: generate quantum networks, measure their connectivity, and sweep
//! ensemble means.
//!
//! Exit status is 0 on success, 1 for invalid input or parameters and 2 when
//! a file cannot be read or written.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{resolve, EnsembleArgs, GenerateArgs, MetricsArgs, PmfArgs, RegionalArgs};

#[derive(Parser)]
#[command(name = "qconn", version, about = "Functional connectivity of quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a complete, Erdős–Rényi or Waxman network with sampled concurrences.
    Generate(GenerateArgs),
    /// QCM/QCF of a network or node subset, optionally with one node's QCC.
    Metrics(MetricsArgs),
    /// Hop-distance PMF of a network.
    Pmf(PmfArgs),
    /// Ensemble-mean QCM/QCF over a grid of mean concurrences.
    Ensemble(EnsembleArgs),
    /// Per-region QCM/QCF on a hexagonal grid of a positioned network.
    Regional(RegionalArgs),
}

fn run(command: Command) -> qconn::Result<()> {
    match command {
        Command::Generate(a) => commands::generate(&resolve(a.config.as_deref(), &a)?),
        Command::Metrics(a) => commands::metrics(&resolve(a.config.as_deref(), &a)?),
        Command::Pmf(a) => commands::pmf(&resolve(a.config.as_deref(), &a)?),
        Command::Ensemble(a) => commands::ensemble(&resolve(a.config.as_deref(), &a)?),
        Command::Regional(a) => commands::regional(&resolve(a.config.as_deref(), &a)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
