//! Run manifests: TOML files with one `[[run]]` table per measured run.
//!
//! Log paths are resolved relative to the manifest's directory.

use std::path::{Path, PathBuf};

use anyhow::Context;
use dvfs_core::ingest::{parse_kernel_trace_from, parse_power_log};
use dvfs_core::{Catalog, DeviceSpec, FftConfig, Mhz, PowerLogFormat, PowerSample, Precision, TraceLog};
use serde::{Deserialize, Serialize};

use crate::exit::{CliError, CliResult, Kind, WithKind};
use crate::output::read_text;

/// Default memory budget for one FFT batch.
pub const DEFAULT_MEMORY_BYTES: u64 = 1 << 31;

fn default_memory() -> u64 {
    DEFAULT_MEMORY_BYTES
}

fn default_batches() -> u64 {
    1
}

fn default_format() -> PowerLogFormat {
    PowerLogFormat::SmiCsv
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub device: String,
    pub precision: Precision,
    pub fft_length: u64,
    pub requested_mhz: Mhz,
    pub power_log: PathBuf,
    #[serde(default = "default_format")]
    pub power_format: PowerLogFormat,
    pub trace_log: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat_group: Option<String>,
    #[serde(default = "default_memory")]
    pub memory_bytes: u64,
    #[serde(default = "default_batches")]
    pub batches: u64,
    /// Added to every power-log timestamp to align it with the trace clock.
    #[serde(default)]
    pub epoch_offset_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    #[serde(default)]
    pub run: Vec<RunManifest>,
}

/// A manifest entry with its logs parsed and its device resolved.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub manifest: RunManifest,
    pub device: DeviceSpec,
    pub config: FftConfig,
    pub samples: Vec<PowerSample>,
    pub trace: TraceLog,
    pub power_path: PathBuf,
    pub trace_path: PathBuf,
}

pub fn read_manifest(path: &Path) -> CliResult<ManifestFile> {
    let text = read_text(path)?;
    let file: ManifestFile = toml::from_str(&text)
        .with_context(|| format!("parsing manifest {}", path.display()))
        .kind(Kind::Input)?;
    if file.run.is_empty() {
        return Err(CliError::msg(Kind::Input, format!("manifest {} has no [[run]] entries", path.display())));
    }
    Ok(file)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Checks the configuration of one entry without touching its logs.
pub fn resolve_config(run: &RunManifest, catalog: &Catalog) -> CliResult<(DeviceSpec, FftConfig)> {
    let device = catalog.device(&run.device).kind(Kind::Config)?.clone();
    let config = FftConfig::new(run.fft_length, run.precision, run.memory_bytes, run.batches).kind(Kind::Config)?;
    Ok((device, config))
}

pub fn load_run(manifest_path: &Path, run: &RunManifest, catalog: &Catalog) -> CliResult<LoadedRun> {
    let (device, config) = resolve_config(run, catalog)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let power_path = resolve(base, &run.power_log);
    let trace_path = resolve(base, &run.trace_log);

    let power_text = read_text(&power_path)?;
    let trace_text = read_text(&trace_path)?;
    let log = parse_power_log(&power_text, run.power_format)
        .with_context(|| format!("in {}", power_path.display()))
        .kind(Kind::Input)?
        .with_offset(run.epoch_offset_ms);
    let trace = parse_kernel_trace_from(&trace_text, &trace_path.display().to_string())
        .with_context(|| format!("in {}", trace_path.display()))
        .kind(Kind::Input)?;

    Ok(LoadedRun {
        manifest: run.clone(),
        device,
        config,
        samples: log.samples,
        trace,
        power_path,
        trace_path,
    })
}

/// Loads every run of every manifest, failing before any output is produced.
pub fn load_all(paths: &[PathBuf], catalog: &Catalog) -> CliResult<Vec<LoadedRun>> {
    let mut runs = Vec::new();
    for path in paths {
        let file = read_manifest(path)?;
        for run in &file.run {
            runs.push(load_run(path, run, catalog)?);
        }
    }
    Ok(runs)
}
