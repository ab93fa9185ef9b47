//! The TegraText power-log grammar.
//!
//! A minimal subset of `tegrastats` output, with each line prefixed by a
//! millisecond timestamp:
//!
//! ```text
//! line      := timestamp_ms WS fields
//! timestamp := [0-9]+ ( "." [0-9]+ )?
//! power     := ( "POM_5V_IN" | "VDD_IN" ) WS current ["mW"] "/" average ["mW"]
//! clock     := "GR3D_FREQ" WS load "%" [ "@" mhz ]
//! ```
//!
//! `current` (milliwatts) becomes the sample power; `average` is ignored.
//! When a `GR3D_FREQ` load carries an `@<mhz>` suffix it becomes the core
//! clock. All other fields are ignored. Blank lines and lines starting with
//! `#` are skipped.

use std::sync::LazyLock;

use regex::Regex;

use super::{check_sample, parse_f64, IngestError};
use crate::types::{Mhz, PowerSample};

static LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?P<ts>[0-9]+(?:\.[0-9]+)?)\s+(?P<rest>.*)$").unwrap());
static POWER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(?:POM_5V_IN|VDD_IN)\s+(?P<cur>[0-9]+)(?:mW)?/(?P<avg>[0-9]+)(?:mW)?").unwrap()
});
static GPU_CLOCK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bGR3D_FREQ\s+[0-9]+%@(?P<mhz>[0-9]+(?:\.[0-9]+)?)").unwrap());

pub fn parse_tegra_text(text: &str) -> Result<Vec<PowerSample>, IngestError> {
    let mut samples: Vec<PowerSample> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let caps = LINE
            .captures(trimmed)
            .ok_or_else(|| IngestError::parse(line, "expected a leading millisecond timestamp"))?;
        let t_ms = parse_f64(line, &caps["ts"], "timestamp")?;
        let rest = &caps["rest"];
        let power = POWER
            .captures(rest)
            .ok_or_else(|| IngestError::parse(line, "no POM_5V_IN or VDD_IN power field"))?;
        let milliwatts = parse_f64(line, &power["cur"], "power")?;
        let core_clock = match GPU_CLOCK.captures(rest) {
            Some(c) => Some(Mhz(parse_f64(line, &c["mhz"], "GPU clock")?)),
            None => None,
        };
        let sample = PowerSample {
            t_ms,
            power_w: milliwatts / 1000.0,
            core_clock,
            mem_clock: None,
        };
        check_sample(line, &sample, samples.last())?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(IngestError::parse(1, "empty power log"));
    }
    Ok(samples)
}
