use std::collections::BTreeMap;
use std::path::PathBuf;

use dvfs_core::metrics::{relative_std, EnergyReport};
use dvfs_core::sweep::{BehaviorThresholds, SweepError};
use dvfs_core::workload::flops;
use dvfs_core::{FrequencyStatus, SweepPoint, SweepResult};
use serde::{Deserialize, Serialize};

use super::analyze::analyze_loaded;
use super::Context;
use crate::exit::{CliError, CliResult, Kind, WithKind};
use crate::manifest::{load_all, LoadedRun};
use crate::output::{read_text, to_json, write_atomic, Format};

pub const SWEEP_SCHEMA_VERSION: u32 = 1;

/// Document written by `sweep` and read by `tradeoff` and `meanopt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    pub schema_version: u32,
    pub device: String,
    pub result: SweepResult,
}

impl SweepFile {
    pub fn read(path: &std::path::Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let file: SweepFile = serde_json::from_str(&text)
            .map_err(|e| CliError::msg(Kind::Input, format!("parsing {}: {e}", path.display())))?;
        if file.schema_version != SWEEP_SCHEMA_VERSION {
            return Err(CliError::msg(
                Kind::Input,
                format!("{}: unsupported schema version {}", path.display(), file.schema_version),
            ));
        }
        Ok(file)
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Run manifests; all runs must share device, precision and FFT length.
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,
    /// Sweep document to write.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Frequency tolerance in MHz; defaults to the device's largest grid step.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Relative dip below the default time that marks behavior A.
    #[arg(long, default_value_t = 0.02)]
    pub dip: f64,
    /// Relative rise above the default time that marks behavior C.
    #[arg(long, default_value_t = 0.10)]
    pub rise: f64,
}

fn check_shared_config(runs: &[LoadedRun]) -> CliResult<()> {
    let first = &runs[0];
    for r in &runs[1..] {
        let mismatch = if r.device.key != first.device.key {
            Some(format!("device {} vs {}", r.device.key, first.device.key))
        } else if r.config.precision != first.config.precision {
            Some(format!("precision {} vs {}", r.config.precision.as_str(), first.config.precision.as_str()))
        } else if r.config.fft_length != first.config.fft_length {
            Some(format!("N={} vs N={}", r.config.fft_length, first.config.fft_length))
        } else if r.config != first.config {
            Some(format!("memory budget or batch count differs in {}", r.power_path.display()))
        } else {
            None
        };
        if let Some(m) = mismatch {
            return Err(CliError::new(Kind::Config, SweepError::ConfigMismatch(m)));
        }
    }
    Ok(())
}

fn severity(s: FrequencyStatus) -> u8 {
    match s {
        FrequencyStatus::Ok => 0,
        FrequencyStatus::Capped => 1,
        FrequencyStatus::Unstable => 2,
    }
}

/// Averages repeated runs at one frequency into a single point.
fn merge_repeats(points: Vec<SweepPoint>, config: &dvfs_core::FftConfig) -> CliResult<SweepPoint> {
    if points.len() == 1 {
        return Ok(points.into_iter().next().expect("one point"));
    }
    let n = points.len() as f64;
    let energies: Vec<f64> = points.iter().map(|p| p.energy_j).collect();
    let energy = energies.iter().sum::<f64>() / n;
    let time = points.iter().map(|p| p.exec_time_s).sum::<f64>() / n;
    let c_p = flops(config, time).kind(Kind::Analysis)?;
    let report = EnergyReport::new(energy, time, c_p).kind(Kind::Analysis)?;
    let verdict = points
        .iter()
        .map(|p| p.verdict)
        .max_by_key(|v| severity(v.status))
        .expect("non-empty");
    let mut merged = SweepPoint::new(points[0].frequency, report, verdict);
    merged.energy_rel_std = relative_std(&energies).ok();
    Ok(merged)
}

pub fn build_sweep(runs: &[LoadedRun], tolerance: Option<f64>, thresholds: BehaviorThresholds) -> CliResult<SweepResult> {
    if runs.is_empty() {
        return Err(CliError::msg(Kind::Input, "no runs"));
    }
    check_shared_config(runs)?;
    let mut by_freq: BTreeMap<i64, Vec<SweepPoint>> = BTreeMap::new();
    for r in runs {
        let a = analyze_loaded(r, tolerance)?;
        for w in &a.warnings {
            eprintln!("warning: {}: {w}", r.power_path.display());
        }
        let f = r.manifest.requested_mhz;
        by_freq.entry(f.khz()).or_default().push(SweepPoint::new(f, a.report, a.verdict));
    }
    let config = runs[0].config;
    let points = by_freq
        .into_values()
        .map(|group| merge_repeats(group, &config))
        .collect::<CliResult<Vec<_>>>()?;
    SweepResult::build(config, points, &runs[0].device, thresholds).kind(Kind::Analysis)
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    let runs = load_all(&args.manifests, &ctx.catalog)?;
    let thresholds = BehaviorThresholds {
        dip: args.dip,
        rise: args.rise,
    };
    let result = build_sweep(&runs, args.tolerance, thresholds)?;
    let file = SweepFile {
        schema_version: SWEEP_SCHEMA_VERSION,
        device: runs[0].device.key.clone(),
        result,
    };
    if let Some(out) = &args.out {
        write_atomic(out, &to_json(&file))?;
    }
    let r = &file.result;
    match ctx.format {
        Format::Json => print!("{}", to_json(&file)),
        Format::Text => {
            println!("{:>10} {:>12} {:>10} {:>10} {:>9}", "mhz", "energy_j", "time_s", "rel_std", "verdict");
            for p in &r.points {
                let rel = p.energy_rel_std.map_or("-".to_string(), |s| format!("{s:.4}"));
                println!(
                    "{:>10} {:>12.4} {:>10.4} {:>10} {:>9}",
                    p.frequency.to_string(),
                    p.energy_j,
                    p.exec_time_s,
                    rel,
                    format!("{:?}", p.verdict.status)
                );
            }
            if let Some(b) = r.behavior {
                println!("behavior={b:?}");
            }
        }
    }
    println!("optimal_mhz={}", r.optimal);
    Ok(())
}
