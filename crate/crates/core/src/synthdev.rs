//! A synthetic GPU with closed-form power and execution time.
//!
//! Power follows `P(f) = p_static + k_lin f + k_dyn f^3`. Execution time is
//! memory-bound at `t_mem` until the clock drops below `f_crit`, where it
//! grows as `f_crit / f`; below `idle_state_f` it is multiplied by
//! `inflation`. An optional Gaussian dip of depth `relief` centred on
//! `relief_center` produces runs whose time first falls as the clock drops.
//!
//! [`simulate_run`] samples that device with a jittered sampler and returns
//! the same structures the log parsers produce, so the whole analysis
//! pipeline can be checked against [`analytic_energy`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{write_smi_csv, write_trace_csv, TraceLog};
use crate::sweep::argmin_high;
use crate::types::{KernelInterval, Mhz, PowerSample};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid power model: {0}")]
    Power(String),
    #[error("invalid time model: {0}")]
    Time(String),
    #[error("invalid sampler: {0}")]
    Sampler(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_static: f64,
    /// W per MHz^3.
    pub k_dyn: f64,
    /// W per MHz.
    pub k_lin: f64,
}

impl PowerModel {
    pub fn power(&self, f: Mhz) -> f64 {
        self.p_static + self.k_lin * f.0 + self.k_dyn * f.0.powi(3)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let coeffs = [self.p_static, self.k_dyn, self.k_lin];
        if coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(SynthError::Power("coefficients must be finite and non-negative".into()));
        }
        if coeffs.iter().all(|c| *c == 0.0) {
            return Err(SynthError::Power("power is zero everywhere".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeModel {
    /// Memory-bound execution time in seconds.
    pub t_mem: f64,
    pub f_crit: Mhz,
    pub idle_state_f: Mhz,
    pub inflation: f64,
    #[serde(default)]
    pub relief: f64,
    #[serde(default)]
    pub relief_center: Mhz,
    #[serde(default = "default_relief_width")]
    pub relief_width: Mhz,
}

fn default_relief_width() -> Mhz {
    Mhz(1.0)
}

impl TimeModel {
    /// The memory-bound/compute-critical model without a dip.
    pub fn new(t_mem: f64, f_crit: f64, idle_state_f: f64, inflation: f64) -> Self {
        TimeModel {
            t_mem,
            f_crit: Mhz(f_crit),
            idle_state_f: Mhz(idle_state_f),
            inflation,
            relief: 0.0,
            relief_center: Mhz(0.0),
            relief_width: default_relief_width(),
        }
    }

    pub fn with_relief(mut self, depth: f64, center: f64, width: f64) -> Self {
        self.relief = depth;
        self.relief_center = Mhz(center);
        self.relief_width = Mhz(width);
        self
    }

    /// Execution time in seconds at clock `f`.
    pub fn time(&self, f: Mhz) -> f64 {
        let mut t = self.t_mem * (self.f_crit.0 / f.0).max(1.0);
        if self.relief > 0.0 {
            let z = (f.0 - self.relief_center.0) / self.relief_width.0;
            t *= 1.0 - self.relief * (-z * z).exp();
        }
        if f.0 < self.idle_state_f.0 {
            t *= self.inflation;
        }
        t
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.t_mem > 0.0) || !self.t_mem.is_finite() {
            return Err(SynthError::Time("t_mem must be positive".into()));
        }
        if !(self.f_crit.0 >= 0.0) || !(self.idle_state_f.0 >= 0.0) {
            return Err(SynthError::Time("frequencies must be non-negative".into()));
        }
        if !(self.inflation >= 1.0) {
            return Err(SynthError::Time("inflation must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.relief) || !(self.relief_width.0 > 0.0) {
            return Err(SynthError::Time("relief must lie in [0, 1) with positive width".into()));
        }
        Ok(())
    }
}

/// How sample instants relate to the kernel boundaries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Free-running sampler starting at `phase_ms`.
    #[default]
    Free,
    /// Jitter-free sampler with instants exactly on both kernel boundaries;
    /// the in-kernel period is stretched to tile the kernel.
    KernelBoundaries,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerModel {
    pub requested_period_ms: f64,
    /// Half-width of the uniform jitter added to each period.
    #[serde(default)]
    pub jitter_ms: f64,
    /// Mean extra delay of the driver on top of the requested period.
    #[serde(default)]
    pub delay_ms: f64,
    #[serde(default)]
    pub phase_ms: f64,
    #[serde(default)]
    pub alignment: Alignment,
    #[serde(default)]
    pub seed: u64,
}

impl SamplerModel {
    pub fn uniform(period_ms: f64) -> Self {
        SamplerModel {
            requested_period_ms: period_ms,
            jitter_ms: 0.0,
            delay_ms: 0.0,
            phase_ms: 0.0,
            alignment: Alignment::Free,
            seed: 0,
        }
    }

    /// A 10 ms request that the driver stretches to about 14.2 ms.
    pub fn driver_like(seed: u64) -> Self {
        SamplerModel {
            requested_period_ms: 10.0,
            jitter_ms: 3.0,
            delay_ms: 4.2,
            phase_ms: 0.0,
            alignment: Alignment::Free,
            seed,
        }
    }

    pub fn aligned(period_ms: f64) -> Self {
        SamplerModel {
            alignment: Alignment::KernelBoundaries,
            ..Self::uniform(period_ms)
        }
    }

    pub fn mean_period_ms(&self) -> f64 {
        self.requested_period_ms + self.delay_ms
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.requested_period_ms > 0.0) || !(self.jitter_ms >= 0.0) || !(self.delay_ms >= 0.0) {
            return Err(SynthError::Sampler("period must be positive, jitter and delay non-negative".into()));
        }
        if self.mean_period_ms() - self.jitter_ms <= 0.0 {
            return Err(SynthError::Sampler("jitter allows non-positive periods".into()));
        }
        if self.alignment == Alignment::KernelBoundaries && (self.jitter_ms > 0.0 || self.delay_ms > 0.0) {
            return Err(SynthError::Sampler("aligned sampling is jitter-free".into()));
        }
        Ok(())
    }
}

/// Run parameters that are not part of the device or sampler models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Driver clock cap; the device runs at `min(f, cap)`.
    pub clock_cap: Option<Mhz>,
    pub mem_clock: Option<Mhz>,
    /// Idle time before the kernel starts.
    pub lead_ms: f64,
    /// Idle time sampled after the kernel ends.
    pub tail_ms: f64,
    pub kernel_name: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            clock_cap: None,
            mem_clock: Some(Mhz(877.0)),
            lead_ms: 100.0,
            tail_ms: 100.0,
            kernel_name: "fft".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRun {
    pub samples: Vec<PowerSample>,
    pub trace: TraceLog,
    /// Clock the device actually ran at.
    pub achieved: Mhz,
}

impl SimulatedRun {
    pub fn kernel(&self) -> &KernelInterval {
        &self.trace.intervals[0]
    }

    pub fn power_csv(&self) -> String {
        write_smi_csv(&self.samples)
    }

    pub fn trace_csv(&self) -> String {
        write_trace_csv(&self.trace.intervals)
    }
}

/// Closed-form energy `P(f) t(f)` in joules.
pub fn analytic_energy(power: &PowerModel, time: &TimeModel, f: Mhz) -> f64 {
    power.power(f) * time.time(f)
}

/// Grid frequency of least analytic energy; ties go to the higher frequency.
pub fn analytic_optimum(power: &PowerModel, time: &TimeModel, grid: &[Mhz]) -> Option<Mhz> {
    argmin_high(grid.iter().map(|&f| (f, analytic_energy(power, time, f))))
}

pub fn simulate_run(power: &PowerModel, time: &TimeModel, sampler: &SamplerModel, f: Mhz) -> Result<SimulatedRun, SynthError> {
    simulate_run_with(power, time, sampler, f, &RunOptions::default())
}

pub fn simulate_run_with(
    power: &PowerModel,
    time: &TimeModel,
    sampler: &SamplerModel,
    f: Mhz,
    options: &RunOptions,
) -> Result<SimulatedRun, SynthError> {
    power.validate()?;
    time.validate()?;
    sampler.validate()?;
    if !(f.0 > 0.0) {
        return Err(SynthError::Time(format!("clock {f} MHz must be positive")));
    }

    let achieved = options.clock_cap.map_or(f, |cap| if cap < f { cap } else { f });
    let start = options.lead_ms;
    let end = start + time.time(achieved) * 1000.0;
    let stop = end + options.tail_ms;

    let times = match sampler.alignment {
        Alignment::KernelBoundaries => aligned_times(sampler.requested_period_ms, start, end, stop),
        Alignment::Free => free_times(sampler, stop),
    };

    let p_on = power.power(achieved);
    let p_off = power.p_static;
    let samples = times
        .into_iter()
        .map(|t| {
            let p = if t > start && t <= end { p_on } else { p_off };
            PowerSample::new(t, p).with_clocks(Some(achieved), options.mem_clock)
        })
        .collect();
    let kernel = KernelInterval::new(start, end, options.kernel_name.clone())
        .ok_or_else(|| SynthError::Time("kernel has zero duration".into()))?;
    Ok(SimulatedRun {
        samples,
        trace: TraceLog::new("synthdev", vec![kernel]),
        achieved,
    })
}

fn free_times(sampler: &SamplerModel, stop: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut t = sampler.phase_ms;
    let mut out = vec![t];
    while t <= stop {
        let jitter = if sampler.jitter_ms > 0.0 {
            rng.random_range(-sampler.jitter_ms..=sampler.jitter_ms)
        } else {
            0.0
        };
        t += sampler.mean_period_ms() + jitter;
        out.push(t);
    }
    out
}

fn aligned_times(period: f64, start: f64, end: f64, stop: f64) -> Vec<f64> {
    let lead = (start / period).floor() as usize;
    let mut out: Vec<f64> = (0..=lead).rev().map(|k| start - k as f64 * period).collect();
    let n = ((end - start) / period).round().max(1.0) as usize;
    let step = (end - start) / n as f64;
    out.extend((1..n).map(|k| start + k as f64 * step));
    out.push(end);
    let tail = ((stop - end) / period).ceil() as usize;
    out.extend((1..=tail).map(|k| end + k as f64 * period));
    out
}

/// Time curves that classify as behaviors A, B and C on a grid topping out at
/// `f_max` (with `f_min` well below half of it).
pub fn canonical_time_models(f_max: f64) -> [TimeModel; 3] {
    let idle = 0.15 * f_max;
    [
        TimeModel::new(1.0, 0.2 * f_max, idle, 3.0).with_relief(0.06, 0.75 * f_max, 0.15 * f_max),
        TimeModel::new(1.0, 0.52 * f_max, idle, 3.0),
        TimeModel::new(1.0, 1.2 * f_max, idle, 3.0),
    ]
}
