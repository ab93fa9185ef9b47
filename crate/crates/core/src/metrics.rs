//! Energy integration, efficiency and measurement-error propagation.
//!
//! Energy is the rectangle sum `E = sum_i P_i * (t_i - t_{i-1})`: each sample's
//! power is held over the window ending at its timestamp, and the first
//! sample of a log carries no energy.

use serde::{Deserialize, Serialize};

use crate::attribution::LocalizedKernel;
use crate::types::PowerSample;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("energy must be positive, got {0} J")]
    InvalidEnergy(f64),
    #[error("duration must be positive, got {0} s")]
    InvalidDuration(f64),
    #[error("mean is zero; relative deviation undefined")]
    DegenerateData,
}

/// Rectangle-sum energy of a sample sequence, in joules.
pub fn energy(samples: &[PowerSample]) -> Result<f64, MetricsError> {
    if samples.len() < 2 {
        return Err(MetricsError::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let joules_ms: f64 = samples.windows(2).map(|w| w[1].power_w * (w[1].t_ms - w[0].t_ms)).sum();
    Ok(joules_ms / 1000.0)
}

/// Energy of one sample held over an explicit window.
pub fn window_energy(sample: &PowerSample, window_ms: f64) -> f64 {
    sample.power_w * window_ms / 1000.0
}

/// Energy attributed to a kernel; boundary windows count fractionally.
pub fn kernel_energy(kernel: &LocalizedKernel) -> f64 {
    kernel.samples.iter().map(|a| window_energy(&a.sample, a.overlap_ms())).sum()
}

/// Energy efficiency `C_p * t / E` in FLOPS/W.
pub fn efficiency(c_p: f64, t_s: f64, energy_j: f64) -> Result<f64, MetricsError> {
    if !(energy_j > 0.0) {
        return Err(MetricsError::InvalidEnergy(energy_j));
    }
    Ok(c_p * t_s / energy_j)
}

/// Increase in energy efficiency `E_opt / E_ref`.
pub fn efficiency_increase(e_opt: f64, e_ref: f64) -> f64 {
    e_opt / e_ref
}

/// A ratio's change in percent, `100 * (ratio - 1)`.
pub fn ratio_to_percent(ratio: f64) -> f64 {
    100.0 * (ratio - 1.0)
}

/// Percent rounded to one decimal for reports.
pub fn format_percent(pct: f64) -> String {
    format!("{pct:.1}")
}

/// Sample standard deviation over the mean.
pub fn relative_std(values: &[f64]) -> Result<f64, MetricsError> {
    if values.len() < 2 {
        return Err(MetricsError::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(MetricsError::DegenerateData);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / mean.abs())
}

/// Relative error of an efficiency increase when both efficiencies share
/// the relative error `rel_std`: `sqrt(2) * rel_std`.
pub fn propagate_increase_error(rel_std: f64) -> f64 {
    std::f64::consts::SQRT_2 * rel_std
}

/// Relative error of an efficiency increase with separate relative errors
/// for the optimal and the reference efficiency.
pub fn propagate_increase_error_pair(rel_std_opt: f64, rel_std_ref: f64) -> f64 {
    rel_std_opt.hypot(rel_std_ref)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub rel_std: f64,
    pub propagated_increase_error: f64,
}

impl ErrorEstimate {
    pub fn from_rel_std(rel_std: f64) -> Self {
        ErrorEstimate {
            rel_std,
            propagated_increase_error: propagate_increase_error(rel_std),
        }
    }

    /// Estimate from repeated-run energies or powers.
    pub fn from_repeats(values: &[f64]) -> Result<Self, MetricsError> {
        relative_std(values).map(Self::from_rel_std)
    }
}

/// Energy and efficiency of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy_j: f64,
    pub duration_s: f64,
    pub avg_power_w: f64,
    pub efficiency_flops_per_w: f64,
    pub c_p: f64,
}

impl EnergyReport {
    pub fn new(energy_j: f64, duration_s: f64, c_p: f64) -> Result<Self, MetricsError> {
        if !(duration_s > 0.0) {
            return Err(MetricsError::InvalidDuration(duration_s));
        }
        Ok(EnergyReport {
            energy_j,
            duration_s,
            avg_power_w: energy_j / duration_s,
            efficiency_flops_per_w: efficiency(c_p, duration_s, energy_j)?,
            c_p,
        })
    }
}
