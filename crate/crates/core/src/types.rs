//! Value types shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// A clock frequency in MHz.
///
/// Driver-reported and catalog frequencies are decimal values such as
/// `921.6`; equality and grid membership are decided on the whole-kHz
/// rounding of the value so that `844.8` generated by stepping matches
/// `844.8` read from a log.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mhz(pub f64);

impl Mhz {
    pub const fn new(value: f64) -> Self {
        Mhz(value)
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    /// Frequency rounded to whole kHz.
    pub fn khz(self) -> i64 {
        (self.0 * 1000.0).round() as i64
    }

    pub fn from_khz(khz: i64) -> Self {
        Mhz(khz as f64 / 1000.0)
    }

    /// Equal at kHz resolution.
    pub fn same_as(self, other: Mhz) -> bool {
        self.khz() == other.khz()
    }
}

impl fmt::Display for Mhz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<f64> for Mhz {
    fn from(v: f64) -> Self {
        Mhz(v)
    }
}

/// One timestamped reading from a power sampler.
///
/// `t_ms` is milliseconds on the capture clock shared with the kernel trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub t_ms: f64,
    pub power_w: f64,
    pub core_clock: Option<Mhz>,
    pub mem_clock: Option<Mhz>,
}

impl PowerSample {
    pub fn new(t_ms: f64, power_w: f64) -> Self {
        PowerSample {
            t_ms,
            power_w,
            core_clock: None,
            mem_clock: None,
        }
    }

    pub fn with_clocks(mut self, core: Option<Mhz>, mem: Option<Mhz>) -> Self {
        self.core_clock = core;
        self.mem_clock = mem;
        self
    }
}

/// One kernel execution window from a trace log, `[start_ms, end_ms]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelInterval {
    pub start_ms: f64,
    pub end_ms: f64,
    pub name: String,
}

impl KernelInterval {
    /// Returns `None` unless `end_ms > start_ms` and both are finite.
    pub fn new(start_ms: f64, end_ms: f64, name: impl Into<String>) -> Option<Self> {
        (start_ms.is_finite() && end_ms.is_finite() && end_ms > start_ms).then(|| KernelInterval {
            start_ms,
            end_ms,
            name: name.into(),
        })
    }

    pub fn duration_ms(&self) -> f64 {
        self.end_ms - self.start_ms
    }
}

/// Floating-point precision of the complex FFT input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precision {
    #[serde(rename = "FP16", alias = "fp16")]
    Fp16,
    #[serde(rename = "FP32", alias = "fp32")]
    Fp32,
    #[serde(rename = "FP64", alias = "fp64")]
    Fp64,
}

impl Precision {
    /// Byte size of one complex element (two reals).
    pub const fn complex_bytes(self) -> u64 {
        match self {
            Precision::Fp16 => 4,
            Precision::Fp32 => 8,
            Precision::Fp64 => 16,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Precision::Fp16 => "FP16",
            Precision::Fp32 => "FP32",
            Precision::Fp64 => "FP64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fp16" | "half" => Ok(Precision::Fp16),
            "fp32" | "float" | "single" => Ok(Precision::Fp32),
            "fp64" | "double" => Ok(Precision::Fp64),
            other => Err(CoreError::InvalidConfig(format!("unknown precision {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_byte_sizes() {
        assert_eq!(Precision::Fp16.complex_bytes(), 4);
        assert_eq!(Precision::Fp32.complex_bytes(), 8);
        assert_eq!(Precision::Fp64.complex_bytes(), 16);
    }

    #[test]
    fn precision_parsing() {
        assert_eq!("FP32".parse::<Precision>().unwrap(), Precision::Fp32);
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Fp64);
        assert!("fp8".parse::<Precision>().is_err());
    }

    #[test]
    fn kernel_interval_rejects_empty() {
        assert!(KernelInterval::new(1.0, 1.0, "k").is_none());
        assert!(KernelInterval::new(2.0, 1.0, "k").is_none());
        assert_eq!(KernelInterval::new(1.0, 3.5, "k").unwrap().duration_ms(), 2.5);
    }

    #[test]
    fn khz_rounding_matches_decimal_literals() {
        assert!(Mhz(921.6 - 76.8).same_as(Mhz(844.8)));
        assert_eq!(Mhz::from_khz(76_800), Mhz(76.8));
    }
}
