//! Parsers for power-sampler logs and kernel-trace logs.
//!
//! Three line grammars are supported:
//!
//! * SmiCsv: header `timestamp_ms,power_w,core_clock_mhz,mem_clock_mhz`,
//!   one sample per row. Clock fields may be left empty.
//! * TegraText: `<timestamp_ms> <tegrastats fields...>`, see [`tegra`].
//! * Trace CSV: header `start_ms,duration_ms,name`, one kernel per row.
//!
//! All timestamps are milliseconds on the capture clock. Power logs keep
//! their samples in file order and reject any backwards step in time.

mod smi;
pub mod tegra;
mod trace;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::types::PowerSample;

pub use smi::{parse_smi_csv, write_smi_csv, SMI_HEADER};
pub use tegra::parse_tegra_text;
pub use trace::{parse_kernel_trace, parse_kernel_trace_from, write_trace_csv, TraceLog, TRACE_HEADER};
pub use validate::{validate_run, RunWarning, ValidateOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: timestamp {current_ms} ms precedes previous sample at {previous_ms} ms")]
    Order {
        line: usize,
        previous_ms: f64,
        current_ms: f64,
    },
}

impl IngestError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IngestError::Parse {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerLogFormat {
    #[serde(rename = "smi-csv")]
    SmiCsv,
    #[serde(rename = "tegra-text")]
    TegraText,
}

impl fmt::Display for PowerLogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerLogFormat::SmiCsv => "smi-csv",
            PowerLogFormat::TegraText => "tegra-text",
        })
    }
}

impl FromStr for PowerLogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smi-csv" | "smi" | "csv" => Ok(PowerLogFormat::SmiCsv),
            "tegra-text" | "tegra" | "tegrastats" => Ok(PowerLogFormat::TegraText),
            other => Err(format!("unknown power log format {other:?}")),
        }
    }
}

/// Parsed power samples plus the timestamp of the first one.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLog {
    pub samples: Vec<PowerSample>,
    /// Timestamp of the first sample, in ms on the capture clock.
    pub origin_ms: f64,
}

impl PowerLog {
    /// Shifts every timestamp by `offset_ms` to correct clock skew against
    /// the trace log.
    pub fn with_offset(mut self, offset_ms: f64) -> Self {
        for s in &mut self.samples {
            s.t_ms += offset_ms;
        }
        self.origin_ms += offset_ms;
        self
    }

    /// Timestamps relative to the first sample.
    pub fn relative_times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_ms - self.origin_ms).collect()
    }
}

pub fn parse_power_log(text: &str, format: PowerLogFormat) -> Result<PowerLog, IngestError> {
    let samples = match format {
        PowerLogFormat::SmiCsv => parse_smi_csv(text)?,
        PowerLogFormat::TegraText => parse_tegra_text(text)?,
    };
    let origin_ms = samples.first().map(|s| s.t_ms).unwrap_or(0.0);
    Ok(PowerLog { samples, origin_ms })
}

/// Checks a parsed sample and its ordering against the previous one.
pub(crate) fn check_sample(line: usize, sample: &PowerSample, previous: Option<&PowerSample>) -> Result<(), IngestError> {
    if !sample.t_ms.is_finite() {
        return Err(IngestError::parse(line, "timestamp is not finite"));
    }
    if !sample.power_w.is_finite() || sample.power_w < 0.0 {
        return Err(IngestError::parse(line, format!("invalid power {} W", sample.power_w)));
    }
    for (label, clock) in [("core", sample.core_clock), ("memory", sample.mem_clock)] {
        if let Some(c) = clock {
            if !c.0.is_finite() || c.0 <= 0.0 {
                return Err(IngestError::parse(line, format!("invalid {label} clock {c} MHz")));
            }
        }
    }
    if let Some(prev) = previous {
        if sample.t_ms < prev.t_ms {
            return Err(IngestError::Order {
                line,
                previous_ms: prev.t_ms,
                current_ms: sample.t_ms,
            });
        }
    }
    Ok(())
}

pub(crate) fn parse_f64(line: usize, field: &str, what: &str) -> Result<f64, IngestError> {
    field
        .parse::<f64>()
        .map_err(|_| IngestError::parse(line, format!("invalid {what} {field:?}")))
}
