//! Joins power samples to kernel intervals and checks the achieved clock.
//!
//! Sample `i` reports the power held over its window `(t[i-1], t[i]]`. The
//! first sample of a log has no window. A kernel `[start, end]` receives every
//! sample whose window overlaps it, weighted by the overlapped fraction of
//! the window.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::TraceLog;
use crate::types::{KernelInterval, Mhz, PowerSample};

/// Default sampling-period criterion, in ms (inclusive).
pub const SAMPLING_THRESHOLD_MS: f64 = 15.0;

/// Share of samples that must sit on one clock for a cap to be reported.
pub const CAP_STABILITY: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttributionError {
    #[error("kernel {name} [{start_ms}, {end_ms}] ms overlaps no power sample")]
    NoOverlap { name: String, start_ms: f64, end_ms: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("samples carry no core clock; cannot verify frequency")]
    MissingClockData,
}

/// A sample attributed to a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributedSample {
    pub sample: PowerSample,
    /// Length of the sample's window, `t[i] - t[i-1]`.
    pub window_ms: f64,
    /// Fraction of the window inside the kernel, in `(0, 1]`.
    pub weight: f64,
}

impl AttributedSample {
    pub fn overlap_ms(&self) -> f64 {
        self.weight * self.window_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedKernel {
    pub interval: KernelInterval,
    pub samples: Vec<AttributedSample>,
    /// Weights of the first and last attributed windows.
    pub boundary_fractions: (f64, f64),
}

impl LocalizedKernel {
    /// Sum of attributed window fractions.
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }
}

/// Attributes samples to one interval.
pub fn localize_kernel(samples: &[PowerSample], interval: &KernelInterval) -> Result<LocalizedKernel, AttributionError> {
    let (start, end) = (interval.start_ms, interval.end_ms);
    // first sample whose window can reach past `start`
    let first = samples.partition_point(|s| s.t_ms <= start).max(1);
    let mut attributed = Vec::new();
    for i in first..samples.len() {
        let (lo, hi) = (samples[i - 1].t_ms, samples[i].t_ms);
        if lo >= end {
            break;
        }
        let window = hi - lo;
        let overlap = hi.min(end) - lo.max(start);
        if window > 0.0 && overlap > 0.0 {
            attributed.push(AttributedSample {
                sample: samples[i],
                window_ms: window,
                weight: (overlap / window).min(1.0),
            });
        }
    }
    match (attributed.first(), attributed.last()) {
        (Some(head), Some(tail)) => {
            let boundary_fractions = (head.weight, tail.weight);
            Ok(LocalizedKernel {
                interval: interval.clone(),
                samples: attributed,
                boundary_fractions,
            })
        }
        _ => Err(AttributionError::NoOverlap {
            name: interval.name.clone(),
            start_ms: start,
            end_ms: end,
        }),
    }
}

/// Attributes samples to every interval of a trace.
pub fn localize_kernels(samples: &[PowerSample], trace: &TraceLog) -> Result<Vec<LocalizedKernel>, AttributionError> {
    trace.intervals.iter().map(|k| localize_kernel(samples, k)).collect()
}

/// Mean of consecutive timestamp differences, in ms.
pub fn effective_sampling_period(samples: &[PowerSample]) -> Result<f64, AttributionError> {
    if samples.len() < 2 {
        return Err(AttributionError::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let total: f64 = samples.windows(2).map(|w| w[1].t_ms - w[0].t_ms).sum();
    Ok(total / (samples.len() - 1) as f64)
}

/// Whether a sampling period meets the criterion (`period <= threshold`).
pub fn check_sampling_criterion(period_ms: f64, threshold_ms: f64) -> bool {
    period_ms <= threshold_ms
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyStatus {
    Ok,
    Capped,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVerdict {
    pub requested: Mhz,
    /// Most frequent reported core clock.
    pub achieved_mode: Mhz,
    pub status: FrequencyStatus,
    /// Fraction of samples reporting `achieved_mode`.
    pub mode_share: f64,
}

/// Compares the achieved clock of a localized kernel with the request.
pub fn verify_frequency(localized: &LocalizedKernel, requested: Mhz, tolerance: Mhz) -> Result<FrequencyVerdict, AttributionError> {
    verify_clocks(localized.samples.iter().map(|s| &s.sample), requested, tolerance)
}

/// [`verify_frequency`] over any set of samples.
///
/// Every sample must carry a core clock. Ties for the most frequent clock go
/// to the lower frequency.
pub fn verify_clocks<'a>(
    samples: impl IntoIterator<Item = &'a PowerSample>,
    requested: Mhz,
    tolerance: Mhz,
) -> Result<FrequencyVerdict, AttributionError> {
    let mut histogram: BTreeMap<i64, usize> = BTreeMap::new();
    let mut total = 0usize;
    for s in samples {
        let clock = s.core_clock.ok_or(AttributionError::MissingClockData)?;
        *histogram.entry(clock.khz()).or_default() += 1;
        total += 1;
    }
    // ascending iteration with a strict comparison keeps the lowest clock on ties
    let (mode_khz, count) = histogram
        .iter()
        .fold(None, |best: Option<(i64, usize)>, (&k, &n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((k, n)),
        })
        .ok_or(AttributionError::InsufficientData { needed: 1, got: 0 })?;

    let share = count as f64 / total as f64;
    let deviation = (mode_khz - requested.khz()).abs();
    let status = if deviation <= tolerance.khz() {
        FrequencyStatus::Ok
    } else if mode_khz < requested.khz() - tolerance.khz() && share >= CAP_STABILITY {
        FrequencyStatus::Capped
    } else {
        FrequencyStatus::Unstable
    };
    Ok(FrequencyVerdict {
        requested,
        achieved_mode: Mhz::from_khz(mode_khz),
        status,
        mode_share: share,
    })
}
