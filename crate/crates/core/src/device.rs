//! Device descriptions and allowed core-clock grids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::types::{Mhz, Precision};
use crate::CoreError;

/// Which default clock serves as the efficiency reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceClock {
    Boost,
    Base,
}

impl fmt::Display for ReferenceClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceClock::Boost => "boost",
            ReferenceClock::Base => "base",
        })
    }
}

impl FromStr for ReferenceClock {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boost" => Ok(ReferenceClock::Boost),
            "base" => Ok(ReferenceClock::Base),
            other => Err(CoreError::InvalidConfig(format!("unknown reference clock {other:?}"))),
        }
    }
}

/// Catalogued mean optimal frequencies per precision.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanOptimal {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fp16: Option<Mhz>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fp32: Option<Mhz>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fp64: Option<Mhz>,
}

impl MeanOptimal {
    pub fn get(&self, precision: Precision) -> Option<Mhz> {
        match precision {
            Precision::Fp16 => self.fp16,
            Precision::Fp32 => self.fp32,
            Precision::Fp64 => self.fp64,
        }
    }
}

/// A GPU model: its settable core clocks and reference clocks.
///
/// The grid is either stepped down from `f_max` by cycling through
/// `step_pattern`, or given verbatim in `frequencies`, which takes precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub key: String,
    pub name: String,
    #[serde(rename = "f_max_mhz")]
    pub f_max: Mhz,
    #[serde(rename = "f_min_mhz")]
    pub f_min: Mhz,
    #[serde(rename = "step_pattern_mhz", default, skip_serializing_if = "Vec::is_empty")]
    pub step_pattern: Vec<Mhz>,
    #[serde(rename = "frequencies_mhz", default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<Mhz>>,
    #[serde(rename = "boost_clock_mhz")]
    pub boost_clock: Mhz,
    #[serde(rename = "base_clock_mhz", default, skip_serializing_if = "Option::is_none")]
    pub base_clock: Option<Mhz>,
    pub mem_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdp_w: Option<f64>,
    /// Power readings on this device are noisy enough that Bluestein
    /// lengths are left out of mean-optimal averaging.
    #[serde(default)]
    pub high_error: bool,
    #[serde(rename = "mean_optimal_mhz", default)]
    pub mean_optimal: MeanOptimal,
}

impl DeviceSpec {
    /// A device stepped by `steps` from `f_max` to `f_min`, with the boost
    /// clock at `f_max`.
    pub fn stepped(name: &str, f_max: f64, f_min: f64, steps: &[f64]) -> Self {
        DeviceSpec {
            key: name.to_ascii_lowercase().replace(' ', "-"),
            name: name.to_string(),
            f_max: Mhz(f_max),
            f_min: Mhz(f_min),
            step_pattern: steps.iter().copied().map(Mhz).collect(),
            frequencies: None,
            boost_clock: Mhz(f_max),
            base_clock: None,
            mem_bytes: 0,
            tdp_w: None,
            high_error: false,
            mean_optimal: MeanOptimal::default(),
        }
    }

    fn invalid(&self, reason: impl Into<String>) -> CoreError {
        CoreError::InvalidDevice {
            device: self.name.clone(),
            reason: reason.into(),
        }
    }

    /// Structural checks. Grid termination is checked by
    /// [`allowed_frequencies`](Self::allowed_frequencies).
    pub fn validate(&self) -> Result<(), CoreError> {
        let finite_pos = |f: Mhz| f.0.is_finite() && f.0 > 0.0;
        if !finite_pos(self.f_min) || !finite_pos(self.f_max) {
            return Err(self.invalid("f_min and f_max must be positive"));
        }
        if self.f_min > self.f_max {
            return Err(self.invalid("f_min exceeds f_max"));
        }
        if !finite_pos(self.boost_clock) {
            return Err(self.invalid("boost clock must be positive"));
        }
        if self.frequencies.is_none() {
            if self.step_pattern.is_empty() && self.f_min.khz() != self.f_max.khz() {
                return Err(self.invalid("needs a step pattern or an explicit frequency list"));
            }
            if self.step_pattern.iter().any(|s| s.khz() <= 0) {
                return Err(self.invalid("every step must be positive"));
            }
        }
        Ok(())
    }

    /// Allowed core clocks, descending from `f_max` to `f_min`.
    pub fn allowed_frequencies(&self) -> Result<Vec<Mhz>, CoreError> {
        self.validate()?;
        let (hi, lo) = (self.f_max.khz(), self.f_min.khz());

        if let Some(list) = &self.frequencies {
            let mut khz: Vec<i64> = list.iter().map(|f| f.khz()).collect();
            khz.sort_unstable_by(|a, b| b.cmp(a));
            khz.dedup();
            if khz.first() != Some(&hi) || khz.last() != Some(&lo) {
                return Err(self.invalid("explicit frequency list must start at f_max and end at f_min"));
            }
            return Ok(khz.into_iter().map(Mhz::from_khz).collect());
        }

        let steps: Vec<i64> = self.step_pattern.iter().map(|s| s.khz()).collect();
        let mut grid = vec![hi];
        let mut current = hi;
        let mut i = 0;
        while current > lo {
            current -= steps[i % steps.len()];
            i += 1;
            if current < lo {
                return Err(CoreError::GridMismatch {
                    device: self.name.clone(),
                    f_min: self.f_min,
                    reached: Mhz::from_khz(current),
                });
            }
            grid.push(current);
        }
        Ok(grid.into_iter().map(Mhz::from_khz).collect())
    }

    pub fn is_on_grid(&self, f: Mhz) -> Result<bool, CoreError> {
        Ok(self.allowed_frequencies()?.iter().any(|g| g.same_as(f)))
    }

    /// Frequency tolerance for clock verification: the largest grid step.
    pub fn default_tolerance(&self) -> Result<Mhz, CoreError> {
        let grid = self.allowed_frequencies()?;
        let widest = grid.windows(2).map(|w| w[0].khz() - w[1].khz()).max().unwrap_or(0);
        Ok(Mhz::from_khz(widest))
    }

    /// The highest grid frequency not above the boost (or base) clock.
    pub fn reference_frequency(&self, clock: ReferenceClock) -> Result<Mhz, CoreError> {
        let target = match clock {
            ReferenceClock::Boost => self.boost_clock,
            ReferenceClock::Base => self.base_clock.ok_or_else(|| CoreError::NoReferenceClock {
                device: self.name.clone(),
                clock,
            })?,
        };
        self.allowed_frequencies()?
            .into_iter()
            .find(|f| f.khz() <= target.khz())
            .ok_or_else(|| self.invalid(format!("{clock} clock {target} MHz is below f_min")))
    }
}
