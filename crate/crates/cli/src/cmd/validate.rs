use std::path::PathBuf;

use dvfs_core::ingest::{validate_run, ValidateOptions};
use serde::Serialize;

use super::Context;
use crate::exit::CliResult;
use crate::manifest::load_all;
use crate::output::{to_json, Format};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Run manifests to check; checks the device catalog when omitted.
    pub manifests: Vec<PathBuf>,
    /// Do not warn about power logs that lack a core-clock column.
    #[arg(long)]
    pub allow_missing_clocks: bool,
}

#[derive(Debug, Serialize)]
struct RunCheck {
    power_log: String,
    trace_log: String,
    samples: usize,
    kernels: usize,
    warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct GridCheck {
    device: String,
    points: Option<usize>,
    error: Option<String>,
}

pub fn run(ctx: &Context, args: &Args) -> CliResult<()> {
    if args.manifests.is_empty() {
        return check_catalog(ctx);
    }
    let runs = load_all(&args.manifests, &ctx.catalog)?;
    let options = ValidateOptions {
        require_clocks: !args.allow_missing_clocks,
    };
    let checks: Vec<RunCheck> = runs
        .iter()
        .map(|r| {
            let mut warnings: Vec<String> = validate_run(&r.samples, &r.trace, options)
                .iter()
                .map(ToString::to_string)
                .collect();
            if let Ok(false) = r.device.is_on_grid(r.manifest.requested_mhz) {
                warnings.push(format!("requested {} MHz is not on the {} grid", r.manifest.requested_mhz, r.device.name));
            }
            RunCheck {
                power_log: r.power_path.display().to_string(),
                trace_log: r.trace_path.display().to_string(),
                samples: r.samples.len(),
                kernels: r.trace.intervals.len(),
                warnings,
            }
        })
        .collect();
    match ctx.format {
        Format::Json => print!("{}", to_json(&checks)),
        Format::Text => {
            for c in &checks {
                let status = if c.warnings.is_empty() { "ok" } else { "warn" };
                println!("{status:<5} {} ({} samples, {} kernels)", c.power_log, c.samples, c.kernels);
                for w in &c.warnings {
                    println!("      {w}");
                }
            }
        }
    }
    Ok(())
}

fn check_catalog(ctx: &Context) -> CliResult<()> {
    let checks: Vec<GridCheck> = ctx
        .catalog
        .grid_report()
        .into_iter()
        .map(|(d, grid)| GridCheck {
            device: d.key.clone(),
            points: grid.as_ref().ok().map(Vec::len),
            error: grid.err().map(|e| e.to_string()),
        })
        .collect();
    match ctx.format {
        Format::Json => print!("{}", to_json(&checks)),
        Format::Text => {
            for c in &checks {
                match (&c.points, &c.error) {
                    (Some(n), _) => println!("ok    {:<12} {n} frequencies", c.device),
                    (_, Some(e)) => println!("list  {:<12} {e}", c.device),
                    _ => {}
                }
            }
        }
    }
    Ok(())
}
