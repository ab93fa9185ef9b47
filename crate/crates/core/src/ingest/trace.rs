use std::fmt::Write as _;

use csv::{ReaderBuilder, Trim};
use serde::{Deserialize, Serialize};

use super::smi::check_header;
use super::{parse_f64, IngestError};
use crate::types::KernelInterval;

pub const TRACE_HEADER: [&str; 3] = ["start_ms", "duration_ms", "name"];

/// Kernel intervals from one trace file, sorted by start.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceLog {
    pub intervals: Vec<KernelInterval>,
    pub source: String,
    /// Overlapping intervals are accepted but reported here.
    pub warnings: Vec<String>,
}

impl TraceLog {
    pub fn new(source: impl Into<String>, mut intervals: Vec<KernelInterval>) -> Self {
        intervals.sort_by(|a, b| a.start_ms.total_cmp(&b.start_ms));
        let mut warnings = Vec::new();
        let mut latest: Option<&KernelInterval> = None;
        for k in &intervals {
            if let Some(prev) = latest {
                if k.start_ms < prev.end_ms {
                    warnings.push(format!(
                        "kernel {} at {} ms overlaps {} ending at {} ms",
                        k.name, k.start_ms, prev.name, prev.end_ms
                    ));
                }
            }
            if latest.is_none_or(|p| k.end_ms > p.end_ms) {
                latest = Some(k);
            }
        }
        TraceLog {
            intervals,
            source: source.into(),
            warnings,
        }
    }

    /// `(first start, last end)` over all intervals.
    pub fn span(&self) -> Option<(f64, f64)> {
        let start = self.intervals.first()?.start_ms;
        let end = self.intervals.iter().map(|k| k.end_ms).fold(f64::NEG_INFINITY, f64::max);
        Some((start, end))
    }
}

/// Parses a trace CSV (`start_ms,duration_ms,name`).
pub fn parse_kernel_trace(text: &str) -> Result<TraceLog, IngestError> {
    parse_kernel_trace_from(text, "")
}

pub fn parse_kernel_trace_from(text: &str, source: &str) -> Result<TraceLog, IngestError> {
    if text.trim().is_empty() {
        return Err(IngestError::parse(1, "empty trace log"));
    }
    let mut reader = ReaderBuilder::new()
        .trim(Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::parse(1, e.to_string()))?
        .clone();
    check_header(&headers, &TRACE_HEADER)?;

    let mut intervals = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            IngestError::parse(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let start = parse_f64(line, &record[0], "start")?;
        let duration = parse_f64(line, &record[1], "duration")?;
        if !start.is_finite() || !duration.is_finite() {
            return Err(IngestError::parse(line, "non-finite start or duration"));
        }
        if duration <= 0.0 {
            return Err(IngestError::parse(line, format!("non-positive duration {duration} ms")));
        }
        let interval = KernelInterval::new(start, start + duration, &record[2])
            .ok_or_else(|| IngestError::parse(line, "duration vanishes at this timestamp"))?;
        intervals.push(interval);
    }
    if intervals.is_empty() {
        return Err(IngestError::parse(2, "trace log has a header but no kernels"));
    }
    Ok(TraceLog::new(source, intervals))
}

/// Serializes intervals as a trace CSV.
pub fn write_trace_csv(intervals: &[KernelInterval]) -> String {
    let mut out = TRACE_HEADER.join(",");
    out.push('\n');
    for k in intervals {
        let _ = writeln!(out, "{},{},{}", k.start_ms, k.duration_ms(), k.name);
    }
    out
}
