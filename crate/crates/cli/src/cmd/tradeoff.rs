use std::path::PathBuf;

use dvfs_core::sweep::{tradeoff_matrix, write_tradeoff_csv};

use super::sweep::SweepFile;
use super::Context;
use crate::exit::{CliError, CliResult, Kind, WithKind};
use crate::output::{to_json, write_atomic, Format};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Sweep documents of one device, one per FFT length.
    #[arg(required = true)]
    pub sweeps: Vec<PathBuf>,
    /// CSV file to write; printed to standard output otherwise.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    let files = args.sweeps.iter().map(|p| SweepFile::read(p)).collect::<CliResult<Vec<_>>>()?;
    let key = &files[0].device;
    if let Some(other) = files.iter().find(|f| &f.device != key) {
        return Err(CliError::msg(
            Kind::Config,
            format!("sweeps mix devices {key} and {}", other.device),
        ));
    }
    let device = ctx.catalog.device(key).kind(Kind::Config)?;
    let sweeps: Vec<_> = files.into_iter().map(|f| f.result).collect();
    let cells = tradeoff_matrix(&sweeps, device, ctx.reference).kind(Kind::Analysis)?;
    let csv = write_tradeoff_csv(&cells);
    if let Some(out) = &args.out {
        write_atomic(out, &csv)?;
    }
    match (ctx.format, &args.out) {
        (Format::Json, _) => print!("{}", to_json(&cells)),
        (Format::Text, None) => print!("{csv}"),
        (Format::Text, Some(out)) => println!("wrote {} cells to {}", cells.len(), out.display()),
    }
    Ok(())
}
