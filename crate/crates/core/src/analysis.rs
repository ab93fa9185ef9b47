//! Single-run analysis: power log and kernel trace in, energy report out.

use serde::{Deserialize, Serialize};

use crate::attribution::{
    check_sampling_criterion, effective_sampling_period, localize_kernel, verify_frequency, AttributionError,
    FrequencyStatus, FrequencyVerdict, SAMPLING_THRESHOLD_MS,
};
use crate::ingest::{validate_run, RunWarning, TraceLog, ValidateOptions};
use crate::metrics::{kernel_energy, EnergyReport, MetricsError};
use crate::types::{KernelInterval, Mhz, PowerSample};
use crate::workload::{flops, FftConfig};
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("trace has no kernels")]
    EmptyTrace,
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAnalysis {
    pub report: EnergyReport,
    pub verdict: FrequencyVerdict,
    pub warnings: Vec<String>,
    pub kernel_count: usize,
    pub sampling_period_ms: f64,
}

/// Analyzes one run of a batch of FFTs.
///
/// The batch spans the first kernel start to the last kernel end; samples
/// overlapping that window give both its energy and its achieved clock.
/// Off-nominal clocks and slow sampling are reported as warnings.
pub fn analyze_run(
    samples: &[PowerSample],
    trace: &TraceLog,
    config: &FftConfig,
    requested: Mhz,
    tolerance: Mhz,
) -> Result<RunAnalysis, AnalysisError> {
    let (start, end) = trace.span().ok_or(AnalysisError::EmptyTrace)?;
    let window = KernelInterval::new(start, end, "batch").ok_or(AnalysisError::EmptyTrace)?;

    let mut warnings: Vec<String> = trace.warnings.clone();
    warnings.extend(
        validate_run(samples, trace, ValidateOptions { require_clocks: true })
            .iter()
            .filter(|w| !matches!(w, RunWarning::TraceOverlap { .. }))
            .map(ToString::to_string),
    );

    let localized = localize_kernel(samples, &window)?;
    let duration_s = window.duration_ms() / 1000.0;
    let energy_j = kernel_energy(&localized);
    let report = EnergyReport::new(energy_j, duration_s, flops(config, duration_s)?)?;

    let verdict = verify_frequency(&localized, requested, tolerance)?;
    match verdict.status {
        FrequencyStatus::Ok => {}
        FrequencyStatus::Capped => warnings.push(format!(
            "requested {requested} MHz but the clock was capped at {} MHz",
            verdict.achieved_mode
        )),
        FrequencyStatus::Unstable => warnings.push(format!(
            "requested {requested} MHz but the clock was unstable (mode {} MHz in {:.0}% of samples)",
            verdict.achieved_mode,
            100.0 * verdict.mode_share
        )),
    }

    let sampling_period_ms = effective_sampling_period(samples)?;
    if !check_sampling_criterion(sampling_period_ms, SAMPLING_THRESHOLD_MS) {
        warnings.push(format!(
            "effective sampling period {sampling_period_ms:.2} ms exceeds {SAMPLING_THRESHOLD_MS} ms"
        ));
    }

    Ok(RunAnalysis {
        report,
        verdict,
        warnings,
        kernel_count: trace.intervals.len(),
        sampling_period_ms,
    })
}
