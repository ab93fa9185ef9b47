use std::path::{Path, PathBuf};

use anyhow::Context as _;
use dvfs_core::sweep::{default_exclusion, mean_optimal_frequency};
use dvfs_core::workload::is_bluestein;
use dvfs_core::Mhz;
use serde::{Deserialize, Serialize};

use super::sweep::SweepFile;
use super::Context;
use crate::exit::{CliError, CliResult, Kind, WithKind};
use crate::output::{read_text, to_json, Format};

#[derive(Debug, clap::Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
pub struct Args {
    /// Sweep documents; each contributes its optimal frequency.
    #[arg(long, num_args = 1.., group = "source")]
    pub sweeps: Vec<PathBuf>,
    /// CSV of `fft_length,optimal_mhz` rows.
    #[arg(long, group = "source", requires = "device")]
    pub optima: Option<PathBuf>,
    /// Catalog device for `--optima`.
    #[arg(long)]
    pub device: Option<String>,
    /// Keep Bluestein lengths even on high-error devices.
    #[arg(long)]
    pub keep_bluestein: bool,
}

#[derive(Debug, Deserialize)]
struct OptimumRow {
    fft_length: u64,
    optimal_mhz: f64,
}

#[derive(Debug, Serialize)]
struct MeanOptimal {
    device: String,
    inputs: usize,
    excluded: Vec<u64>,
    mean_optimal_mhz: Mhz,
}

fn read_optima(path: &Path) -> CliResult<Vec<(u64, Mhz)>> {
    let text = read_text(path)?;
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .deserialize::<OptimumRow>()
        .map(|row| row.map(|r| (r.fft_length, Mhz(r.optimal_mhz))))
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
        .kind(Kind::Input)
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    let (key, optima) = match &args.optima {
        Some(path) => (args.device.clone().expect("clap requires device"), read_optima(path)?),
        None => {
            let files = args.sweeps.iter().map(|p| SweepFile::read(p)).collect::<CliResult<Vec<_>>>()?;
            let key = files[0].device.clone();
            if let Some(other) = files.iter().find(|f| f.device != key) {
                return Err(CliError::msg(Kind::Config, format!("sweeps mix devices {key} and {}", other.device)));
            }
            let optima = files.iter().map(|f| (f.result.config.fft_length, f.result.optimal)).collect();
            (key, optima)
        }
    };
    let device = ctx.catalog.device(&key).kind(Kind::Config)?;
    let grid = device.allowed_frequencies().kind(Kind::Config)?;
    let exclude = default_exclusion(device);
    let keep = args.keep_bluestein;
    let excluded: Vec<u64> = optima.iter().map(|o| o.0).filter(|&n| !keep && exclude(n)).collect();
    let f = mean_optimal_frequency(&optima, &grid, |n| !keep && exclude(n)).kind(Kind::Analysis)?;

    match ctx.format {
        Format::Json => print!(
            "{}",
            to_json(&MeanOptimal {
                device: device.key.clone(),
                inputs: optima.len(),
                excluded,
                mean_optimal_mhz: f,
            })
        ),
        Format::Text => {
            if !excluded.is_empty() {
                let bluestein = excluded.iter().filter(|&&n| is_bluestein(n)).count();
                eprintln!("excluded {bluestein} Bluestein lengths on {}", device.name);
            }
            println!("mean_optimal_mhz={f}");
        }
    }
    Ok(())
}
