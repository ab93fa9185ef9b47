//! `dvfs`: energy analysis of GPU FFT runs across core-clock frequencies.
//!
//! Exit status: 0 on success, 2 for input or parse errors, 3 for analysis
//! errors, 4 for configuration errors.

mod cmd;
mod exit;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dvfs_core::catalog::CATALOG_ENV;
use dvfs_core::{Catalog, ReferenceClock};

use crate::cmd::Context;
use crate::exit::{CliResult, Kind, WithKind};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "dvfs", version, about = "Energy and clock-frequency analysis for GPU FFT runs")]
struct Cli {
    /// Device catalog TOML; the bundled catalog is used otherwise.
    #[arg(long, global = true, env = CATALOG_ENV)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for simulated sampling; overrides the model's own seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reference clock that trade-offs are measured against.
    #[arg(long, global = true, default_value_t = ReferenceClock::Boost)]
    reference: ReferenceClock,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy, efficiency and clock verdict for single runs.
    Analyze(cmd::analyze::Args),
    /// Combine runs at different clocks into one sweep and its optimum.
    Sweep(cmd::sweep::Args),
    /// Efficiency gain against time increase for every swept cell.
    Tradeoff(cmd::tradeoff::Args),
    /// Mean optimal frequency across FFT lengths, snapped to the grid.
    Meanopt(cmd::meanopt::Args),
    /// Clock lock/reset plan for a processing pipeline.
    Plan(cmd::plan::Args),
    /// Generate logs from the synthetic device.
    Simulate(cmd::simulate::Args),
    /// Check logs and manifests, or the catalog grids.
    Validate(cmd::validate::Args),
}

fn load_catalog(path: Option<&PathBuf>) -> CliResult<Catalog> {
    match path {
        Some(p) => Catalog::load(p).kind(Kind::Config),
        None => Ok(Catalog::builtin()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context {
        catalog: load_catalog(cli.catalog.as_ref())?,
        format: cli.format,
        seed: cli.seed,
        reference: cli.reference,
    };
    match &cli.command {
        Command::Analyze(a) => cmd::analyze::run(&ctx, a),
        Command::Sweep(a) => cmd::sweep::run(&ctx, a),
        Command::Tradeoff(a) => cmd::tradeoff::run(&ctx, a),
        Command::Meanopt(a) => cmd::meanopt::run(&ctx, a),
        Command::Plan(a) => cmd::plan::run(&ctx, a),
        Command::Simulate(a) => cmd::simulate::run(&ctx, a),
        Command::Validate(a) => cmd::validate::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
