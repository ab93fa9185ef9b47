use std::path::PathBuf;

use dvfs_core::{analyze_run, Mhz, Precision, RunAnalysis};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::exit::{CliResult, Kind, WithKind};
use crate::manifest::{load_all, LoadedRun};
use crate::output::{to_json, write_atomic, Format};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub runs: Vec<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub device: String,
    pub precision: Precision,
    pub fft_length: u64,
    pub requested_mhz: Mhz,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat_group: Option<String>,
    pub power_log: String,
    pub trace_log: String,
    pub analysis: RunAnalysis,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Run manifests.
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,
    /// Report file to write.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Frequency tolerance in MHz; defaults to the device's largest grid step.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Analyzes one loaded run, adding a warning when the request is off-grid.
pub fn analyze_loaded(run: &LoadedRun, tolerance: Option<f64>) -> CliResult<RunAnalysis> {
    let requested = run.manifest.requested_mhz;
    let tolerance = match tolerance {
        Some(t) => Mhz(t),
        None => run.device.default_tolerance().kind(Kind::Config)?,
    };
    let mut analysis = analyze_run(&run.samples, &run.trace, &run.config, requested, tolerance)
        .map_err(anyhow::Error::from)
        .map_err(|e| e.context(format!("analyzing {}", run.power_path.display())))
        .kind(Kind::Analysis)?;
    if let Ok(false) = run.device.is_on_grid(requested) {
        analysis
            .warnings
            .push(format!("requested {requested} MHz is not on the {} grid", run.device.name));
    }
    Ok(analysis)
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    let runs = load_all(&args.manifests, &ctx.catalog)?;
    let reports = runs
        .iter()
        .map(|r| {
            Ok(RunReport {
                device: r.device.key.clone(),
                precision: r.manifest.precision,
                fft_length: r.manifest.fft_length,
                requested_mhz: r.manifest.requested_mhz,
                repeat_group: r.manifest.repeat_group.clone(),
                power_log: r.power_path.display().to_string(),
                trace_log: r.trace_path.display().to_string(),
                analysis: analyze_loaded(r, args.tolerance)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        runs: reports,
    };
    if let Some(out) = &args.out {
        write_atomic(out, &to_json(&report))?;
    }
    match ctx.format {
        Format::Json => print!("{}", to_json(&report)),
        Format::Text => print_text(&report),
    }
    for r in &report.runs {
        for w in &r.analysis.warnings {
            eprintln!("warning: {}: {w}", r.power_log);
        }
    }
    Ok(())
}

fn print_text(report: &AnalysisReport) {
    println!(
        "{:<12} {:>6} {:>8} {:>10} {:>12} {:>10} {:>10} {:>14} {:>9}",
        "device", "prec", "N", "req_mhz", "energy_j", "time_s", "power_w", "gflops_per_w", "verdict"
    );
    for r in &report.runs {
        let a = &r.analysis;
        println!(
            "{:<12} {:>6} {:>8} {:>10} {:>12.4} {:>10.4} {:>10.2} {:>14.3} {:>9}",
            r.device,
            r.precision.as_str(),
            r.fft_length,
            r.requested_mhz.to_string(),
            a.report.energy_j,
            a.report.duration_s,
            a.report.avg_power_w,
            a.report.efficiency_flops_per_w / 1e9,
            format!("{:?}", a.verdict.status),
        );
    }
}
