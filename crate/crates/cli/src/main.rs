//! `scad-amp`: seeded, resumable parameter sweeps written as CSV.
//!
//! Exit status is 0 on success, 1 when a numerical step failed (the CSV is
//! still written, with the failure recorded in the affected rows) or a file
//! could not be written, and 2 for usage errors.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod sweep;

use clap::{Args, Parser, Subcommand};
use config::{Experiment, Overrides, Settings};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Parser)]
#[command(
    name = "scad-amp",
    version,
    about = "Sweeps for SCAD-penalized regression: AMP, density evolution, replica analysis and coordinate descent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file with the sweep settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; overrides `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Does not affect the output.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
}

#[derive(Subcommand)]
enum Command {
    /// AMP on sampled instances: per-seed rows and per-point summaries.
    AmpSweep(Common),
    /// Density-evolution fixed points and AMP local stability.
    DeFixedPoint(Common),
    /// Replica-symmetric saddle points, free energy and AT stability.
    RsSweep(Common),
    /// RS/RSB boundary a_c(lambda) for each alpha.
    PhaseDiagram(Common),
    /// Sparsity against representation error along the lambda grid.
    RateDistortion(Common),
    /// Coordinate-descent uniqueness threshold against the replica boundary.
    CdCompare(Common),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (experiment, common) = match cli.command {
        Command::AmpSweep(c) => (Experiment::AmpSweep, c),
        Command::DeFixedPoint(c) => (Experiment::DeFixedPoint, c),
        Command::RsSweep(c) => (Experiment::RsSweep, c),
        Command::PhaseDiagram(c) => (Experiment::PhaseDiagram, c),
        Command::RateDistortion(c) => (Experiment::RateDistortion, c),
        Command::CdCompare(c) => (Experiment::CdCompare, c),
    };
    let settings = Settings::load(
        experiment,
        common.config.as_deref(),
        Overrides {
            seed: common.seed,
            out: common.out,
        },
    )?;
    let header = sweep::header(experiment.name(), &settings.echo());
    let out = settings.output.clone();
    let outcome = sweep::run(
        commands::build(settings).as_ref(),
        &header,
        &out,
        common.threads as usize,
    )?;
    for f in &outcome.failures {
        eprintln!("numerical failure: {f}");
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
