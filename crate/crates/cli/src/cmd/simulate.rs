use std::path::PathBuf;

use anyhow::Context as _;
use dvfs_core::synthdev::{
    analytic_energy, analytic_optimum, simulate_run_with, PowerModel, RunOptions, SamplerModel, TimeModel,
};
use dvfs_core::{FftConfig, Mhz, PowerLogFormat, Precision};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::exit::{CliError, CliResult, Kind, WithKind};
use crate::manifest::{ManifestFile, RunManifest, DEFAULT_MEMORY_BYTES};
use crate::output::{read_text, to_json, write_atomic, Format};

fn default_memory() -> u64 {
    DEFAULT_MEMORY_BYTES
}

/// Synthetic sweep description read by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub device: String,
    pub precision: Precision,
    pub fft_length: u64,
    #[serde(default = "default_memory")]
    pub memory_bytes: u64,
    #[serde(rename = "frequencies_mhz")]
    pub frequencies: Vec<Mhz>,
    /// Driver clock cap applied to every run.
    #[serde(default, rename = "clock_cap_mhz")]
    pub clock_cap: Option<Mhz>,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    pub power: PowerModel,
    pub time: TimeModel,
    pub sampler: SamplerModel,
}

fn default_repeats() -> u32 {
    1
}

#[derive(Debug, Serialize)]
struct TruthPoint {
    frequency_mhz: Mhz,
    energy_j: f64,
    exec_time_s: f64,
}

#[derive(Debug, Serialize)]
struct Truth {
    device: String,
    analytic_optimum_mhz: Option<Mhz>,
    points: Vec<TruthPoint>,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model TOML with `[power]`, `[time]` and `[sampler]` tables.
    pub model: PathBuf,
    /// Directory for the generated logs, manifest and ground truth.
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

fn file_stem(f: Mhz, repeat: u32) -> String {
    format!("{}mhz_r{repeat}", f.to_string().replace('.', "p"))
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    let text = read_text(&args.model)?;
    let model: ModelFile = toml::from_str(&text)
        .with_context(|| format!("parsing model {}", args.model.display()))
        .kind(Kind::Input)?;
    let device = ctx.catalog.device(&model.device).kind(Kind::Config)?;
    FftConfig::new(model.fft_length, model.precision, model.memory_bytes, 1).kind(Kind::Config)?;
    if model.frequencies.is_empty() || model.repeats == 0 {
        return Err(CliError::msg(Kind::Config, "model needs at least one frequency and one repeat"));
    }
    if let Ok(grid) = device.allowed_frequencies() {
        for f in &model.frequencies {
            if !grid.iter().any(|g| g.same_as(*f)) {
                eprintln!("warning: {f} MHz is not on the {} grid", device.name);
            }
        }
    }

    let base_seed = ctx.seed.unwrap_or(model.sampler.seed);
    let options = RunOptions {
        clock_cap: model.clock_cap,
        ..RunOptions::default()
    };
    let mut manifest = ManifestFile::default();
    let mut outputs: Vec<(PathBuf, String)> = Vec::new();
    let mut seed = base_seed;
    for &f in &model.frequencies {
        for repeat in 0..model.repeats {
            let sampler = SamplerModel { seed, ..model.sampler };
            seed = seed.wrapping_add(1);
            let run = simulate_run_with(&model.power, &model.time, &sampler, f, &options).kind(Kind::Config)?;
            let stem = file_stem(f, repeat);
            let power_name = format!("power_{stem}.csv");
            let trace_name = format!("trace_{stem}.csv");
            outputs.push((args.out_dir.join(&power_name), run.power_csv()));
            outputs.push((args.out_dir.join(&trace_name), run.trace_csv()));
            manifest.run.push(RunManifest {
                device: device.key.clone(),
                precision: model.precision,
                fft_length: model.fft_length,
                requested_mhz: f,
                power_log: power_name.into(),
                power_format: PowerLogFormat::SmiCsv,
                trace_log: trace_name.into(),
                repeat_group: (model.repeats > 1).then(|| format!("r{repeat}")),
                memory_bytes: model.memory_bytes,
                batches: 1,
                epoch_offset_ms: 0.0,
            });
        }
    }

    let achieved = |f: Mhz| model.clock_cap.map_or(f, |c| if c < f { c } else { f });
    let truth = Truth {
        device: device.key.clone(),
        analytic_optimum_mhz: analytic_optimum(&model.power, &model.time, &model.frequencies),
        points: model
            .frequencies
            .iter()
            .map(|&f| TruthPoint {
                frequency_mhz: f,
                energy_j: analytic_energy(&model.power, &model.time, achieved(f)),
                exec_time_s: model.time.time(achieved(f)),
            })
            .collect(),
    };
    let manifest_text = toml::to_string(&manifest).kind(Kind::Config)?;
    outputs.push((args.out_dir.join("manifest.toml"), manifest_text));
    outputs.push((args.out_dir.join("truth.json"), to_json(&truth)));

    for (path, contents) in &outputs {
        write_atomic(path, contents)?;
    }
    match ctx.format {
        Format::Json => print!("{}", to_json(&truth)),
        Format::Text => {
            println!("wrote {} runs to {}", manifest.run.len(), args.out_dir.display());
            if let Some(f) = truth.analytic_optimum_mhz {
                println!("analytic_optimum_mhz={f}");
            }
        }
    }
    Ok(())
}
