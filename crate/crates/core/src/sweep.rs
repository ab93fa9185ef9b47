//! Frequency-sweep analysis: optimal and mean optimal frequencies,
//! execution-time behavior classes and the efficiency/time trade-off matrix.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::attribution::FrequencyVerdict;
use crate::device::{DeviceSpec, ReferenceClock};
use crate::metrics::{efficiency_increase, ratio_to_percent, EnergyReport};
use crate::types::Mhz;
use crate::workload::{is_bluestein, FftConfig};
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("no data: {0}")]
    NoData(String),
    #[error("sweep for N={fft_length} has no point at reference frequency {reference} MHz")]
    MissingReference { fft_length: u64, reference: Mhz },
    #[error("runs do not share one configuration: {0}")]
    ConfigMismatch(String),
    #[error("duplicate sweep frequency {0} MHz")]
    DuplicateFrequency(Mhz),
    #[error(transparent)]
    Device(#[from] CoreError),
}

/// One measured frequency of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub frequency: Mhz,
    /// Energy per FFT batch.
    pub energy_j: f64,
    pub exec_time_s: f64,
    pub report: EnergyReport,
    pub verdict: FrequencyVerdict,
    /// Relative standard deviation of energy across repeats, when repeated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_rel_std: Option<f64>,
}

impl SweepPoint {
    pub fn new(frequency: Mhz, report: EnergyReport, verdict: FrequencyVerdict) -> Self {
        SweepPoint {
            frequency,
            energy_j: report.energy_j,
            exec_time_s: report.duration_s,
            report,
            verdict,
            energy_rel_std: None,
        }
    }
}

/// Execution-time response to lowering the core clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Behavior {
    /// Time first decreases.
    A,
    /// Time rises only slightly.
    B,
    /// Time rises notably with each step down.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorThresholds {
    /// A when the time ratio dips below `1 - dip`.
    pub dip: f64,
    /// C when the time ratio exceeds `1 + rise` above the midpoint.
    pub rise: f64,
}

impl Default for BehaviorThresholds {
    fn default() -> Self {
        BehaviorThresholds { dip: 0.02, rise: 0.10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: FftConfig,
    /// Sorted by descending frequency.
    pub points: Vec<SweepPoint>,
    /// Execution time at the boost reference, when that point was swept.
    pub t_default: Option<f64>,
    /// Classified over the points at or below the boost reference.
    pub optimal: Mhz,
    pub behavior: Option<Behavior>,
}

impl SweepResult {
    pub fn build(
        config: FftConfig,
        mut points: Vec<SweepPoint>,
        device: &DeviceSpec,
        thresholds: BehaviorThresholds,
    ) -> Result<Self, SweepError> {
        points.sort_by(|a, b| b.frequency.0.total_cmp(&a.frequency.0));
        if let Some(w) = points.windows(2).find(|w| w[0].frequency.same_as(w[1].frequency)) {
            return Err(SweepError::DuplicateFrequency(w[0].frequency));
        }
        let optimal = optimal_frequency(&points)?;
        let boost = device.reference_frequency(ReferenceClock::Boost)?;
        let t_default = points
            .iter()
            .find(|p| p.frequency.same_as(boost))
            .map(|p| p.exec_time_s);
        // the curve starts at the default clock; faster points above it are not a dip
        let curve: Vec<(Mhz, f64)> = points
            .iter()
            .filter(|p| p.frequency.khz() <= boost.khz())
            .map(|p| (p.frequency, p.exec_time_s))
            .collect();
        let behavior = match t_default {
            Some(t_d) if curve.len() >= 3 => Some(classify_behavior(&curve, t_d, thresholds)?),
            _ => None,
        };
        Ok(SweepResult {
            config,
            points,
            t_default,
            optimal,
            behavior,
        })
    }

    pub fn point_at(&self, f: Mhz) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.frequency.same_as(f))
    }
}

/// Frequency with the least energy; ties go to the higher frequency.
pub fn optimal_frequency(points: &[SweepPoint]) -> Result<Mhz, SweepError> {
    argmin_high(points.iter().map(|p| (p.frequency, p.energy_j)))
        .ok_or_else(|| SweepError::NoData("empty sweep".into()))
}

/// Argmin over `(frequency, value)` pairs with ties to the higher frequency.
pub fn argmin_high(pairs: impl IntoIterator<Item = (Mhz, f64)>) -> Option<Mhz> {
    pairs
        .into_iter()
        .fold(None, |best: Option<(Mhz, f64)>, (f, v)| match best {
            Some((bf, bv)) if bv < v || (bv == v && bf >= f) => best,
            _ => Some((f, v)),
        })
        .map(|(f, _)| f)
}

/// Grid frequency nearest to `value`; equidistant values go to the higher.
pub fn snap_to_grid(value: f64, grid: &[Mhz]) -> Option<Mhz> {
    grid.iter().copied().fold(None, |best: Option<Mhz>, g| match best {
        Some(b) => {
            let (db, dg) = ((b.0 - value).abs(), (g.0 - value).abs());
            if dg < db || (dg == db && g > b) {
                Some(g)
            } else {
                Some(b)
            }
        }
        None => Some(g),
    })
}

/// Mean of the non-excluded optima, snapped to the grid.
pub fn mean_optimal_frequency(
    optima: &[(u64, Mhz)],
    grid: &[Mhz],
    exclude: impl Fn(u64) -> bool,
) -> Result<Mhz, SweepError> {
    let kept: Vec<f64> = optima.iter().filter(|(n, _)| !exclude(*n)).map(|(_, f)| f.0).collect();
    if kept.is_empty() {
        return Err(SweepError::NoData("every optimum was excluded".into()));
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    snap_to_grid(mean, grid).ok_or_else(|| SweepError::NoData("empty frequency grid".into()))
}

/// The default exclusion: Bluestein lengths on high-error devices.
pub fn default_exclusion(device: &DeviceSpec) -> impl Fn(u64) -> bool {
    let high_error = device.high_error;
    move |n| high_error && is_bluestein(n)
}

/// Classifies a time-versus-frequency curve against the default time `t_d`.
///
/// Only points above the midpoint of the swept range are considered.
pub fn classify_behavior(curve: &[(Mhz, f64)], t_default: f64, thresholds: BehaviorThresholds) -> Result<Behavior, SweepError> {
    if curve.len() < 3 {
        return Err(SweepError::NoData(format!("{} points; need at least 3", curve.len())));
    }
    if !(t_default > 0.0) {
        return Err(SweepError::NoData(format!("default time {t_default} s")));
    }
    let hi = curve.iter().map(|p| p.0 .0).fold(f64::NEG_INFINITY, f64::max);
    let lo = curve.iter().map(|p| p.0 .0).fold(f64::INFINITY, f64::min);
    let midpoint = (hi + lo) / 2.0;
    let ratios: Vec<f64> = curve
        .iter()
        .filter(|(f, _)| f.0 > midpoint)
        .map(|(_, t)| t / t_default)
        .collect();

    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if min_ratio < 1.0 - thresholds.dip {
        Ok(Behavior::A)
    } else if ratios.iter().any(|&r| r > 1.0 + thresholds.rise) {
        Ok(Behavior::C)
    } else {
        Ok(Behavior::B)
    }
}

/// Percent change of execution time against the default.
pub fn time_increase(t_f: f64, t_d: f64) -> f64 {
    ratio_to_percent(t_f / t_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCell {
    pub fft_length: u64,
    pub frequency: Mhz,
    pub efficiency_gain_pct: f64,
    pub time_increase_pct: f64,
}

/// One cell per swept `(N, f)`, ordered by ascending N then descending f.
pub fn tradeoff_matrix(
    sweeps: &[SweepResult],
    device: &DeviceSpec,
    reference: ReferenceClock,
) -> Result<Vec<TradeoffCell>, SweepError> {
    let f_ref = device.reference_frequency(reference)?;
    let mut ordered: Vec<&SweepResult> = sweeps.iter().collect();
    ordered.sort_by_key(|s| s.config.fft_length);

    let mut cells = Vec::new();
    for sweep in ordered {
        let base = sweep.point_at(f_ref).ok_or(SweepError::MissingReference {
            fft_length: sweep.config.fft_length,
            reference: f_ref,
        })?;
        for p in &sweep.points {
            cells.push(TradeoffCell {
                fft_length: sweep.config.fft_length,
                frequency: p.frequency,
                efficiency_gain_pct: ratio_to_percent(efficiency_increase(
                    p.report.efficiency_flops_per_w,
                    base.report.efficiency_flops_per_w,
                )),
                time_increase_pct: time_increase(p.exec_time_s, base.exec_time_s),
            });
        }
    }
    Ok(cells)
}

pub const TRADEOFF_HEADER: &str = "fft_length,frequency_mhz,eff_gain_pct,time_increase_pct";

/// Trade-off CSV with percentages rounded to one decimal.
pub fn write_tradeoff_csv(cells: &[TradeoffCell]) -> String {
    let mut out = String::from(TRADEOFF_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{:.1},{:.1}",
            c.fft_length, c.frequency, c.efficiency_gain_pct, c.time_increase_pct
        );
    }
    out
}
