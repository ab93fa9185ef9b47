use std::path::PathBuf;

use anyhow::Context as _;
use dvfs_core::rtplan::{build_clock_plan, expected_pipeline_gain, required_hardware_scale, speedup, PlanError};
use dvfs_core::{PipelineStage, RealTimeBudget};
use serde::{Deserialize, Serialize};

use super::Context;
use crate::exit::{CliError, CliResult, Kind, WithKind};
use crate::output::{read_text, to_json, write_atomic, Format};

/// Pipeline description read by `plan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineFile {
    pub device: String,
    #[serde(default)]
    pub gpu_index: u32,
    #[serde(default)]
    pub budget: Option<BudgetSpec>,
    #[serde(rename = "stage")]
    pub stages: Vec<PipelineStage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub t_acquire_s: f64,
    pub t_process_s: f64,
    /// Slow-down of the processing time caused by the locked clocks.
    #[serde(default)]
    pub time_increase_pct: f64,
}

#[derive(Debug, Serialize)]
struct PlanSummary {
    device: String,
    locks: usize,
    resets: usize,
    expected_gain: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    speedup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hardware_scale: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Pipeline TOML with `device` and `[[stage]]` tables.
    pub pipeline: PathBuf,
    /// Plan document to write.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also render the plan as a shell script.
    #[arg(long)]
    pub script: Option<PathBuf>,
}

fn plan_kind(e: &PlanError) -> Kind {
    match e {
        PlanError::Document(_) => Kind::Input,
        _ => Kind::Config,
    }
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    let text = read_text(&args.pipeline)?;
    let pipeline: PipelineFile = toml::from_str(&text)
        .with_context(|| format!("parsing pipeline {}", args.pipeline.display()))
        .kind(Kind::Input)?;
    let device = ctx.catalog.device(&pipeline.device).kind(Kind::Config)?;
    let plan = build_clock_plan(&pipeline.stages, device).map_err(|e| CliError::new(plan_kind(&e), e))?;
    let gain = expected_pipeline_gain(&pipeline.stages).map_err(|e| CliError::new(plan_kind(&e), e))?;

    let (s, scale) = match pipeline.budget {
        Some(b) => {
            let budget = RealTimeBudget::new(b.t_acquire_s, b.t_process_s).kind(Kind::Config)?;
            let s = speedup(&budget);
            (Some(s), Some(required_hardware_scale(b.time_increase_pct, s)))
        }
        None => (None, None),
    };

    if let Some(out) = &args.out {
        write_atomic(out, &plan.to_json())?;
    }
    if let Some(script) = &args.script {
        write_atomic(script, &plan.to_shell_script(pipeline.gpu_index))?;
    }

    let summary = PlanSummary {
        device: device.key.clone(),
        locks: plan.lock_count(),
        resets: plan.reset_count(),
        expected_gain: gain,
        speedup: s,
        hardware_scale: scale,
    };
    match ctx.format {
        Format::Json => print!("{}", to_json(&summary)),
        Format::Text => {
            for e in plan.entries() {
                match (e.min_mhz, e.max_mhz) {
                    (Some(lo), Some(hi)) => println!("{:<6} {:<16} {lo}-{hi} MHz", e.action, e.stage),
                    _ => println!("{:<6} {}", e.action, e.stage),
                }
            }
            println!("locks={} resets={}", summary.locks, summary.resets);
            println!("expected_gain={:.4}", gain);
            if let (Some(s), Some(h)) = (s, scale) {
                println!("speedup={s:.4} hardware_scale={h:.4}");
            }
        }
    }
    Ok(())
}
