use std::fmt;

use serde::{Deserialize, Serialize};

use super::TraceLog;
use crate::types::PowerSample;

/// Gaps wider than this multiple of the median period are reported.
pub const GAP_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Cap detection needs a core-clock column.
    pub require_clocks: bool,
}

/// Non-fatal findings about a run's logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunWarning {
    TraceOutsideSpan { kernel: String, start_ms: f64, end_ms: f64 },
    SampleGap { after_ms: f64, gap_ms: f64, median_ms: f64 },
    MissingClock { samples: usize },
    TraceOverlap { message: String },
}

impl fmt::Display for RunWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunWarning::TraceOutsideSpan { kernel, start_ms, end_ms } => write!(
                f,
                "trace exceeds power log span: kernel {kernel} [{start_ms}, {end_ms}] ms"
            ),
            RunWarning::SampleGap {
                after_ms,
                gap_ms,
                median_ms,
            } => write!(
                f,
                "sample gap of {gap_ms} ms after {after_ms} ms exceeds {GAP_FACTOR}x the median period of {median_ms} ms"
            ),
            RunWarning::MissingClock { samples } => {
                write!(f, "core clock missing in {samples} samples; frequency cannot be verified")
            }
            RunWarning::TraceOverlap { message } => f.write_str(message),
        }
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

pub fn validate_run(samples: &[PowerSample], trace: &TraceLog, options: ValidateOptions) -> Vec<RunWarning> {
    let mut warnings: Vec<RunWarning> = trace
        .warnings
        .iter()
        .map(|m| RunWarning::TraceOverlap { message: m.clone() })
        .collect();

    if let (Some(first), Some(last)) = (samples.first(), samples.last()) {
        for k in &trace.intervals {
            if k.start_ms < first.t_ms || k.end_ms > last.t_ms {
                warnings.push(RunWarning::TraceOutsideSpan {
                    kernel: k.name.clone(),
                    start_ms: k.start_ms,
                    end_ms: k.end_ms,
                });
            }
        }
    }

    let mut gaps: Vec<f64> = samples.windows(2).map(|w| w[1].t_ms - w[0].t_ms).collect();
    if let Some(median_ms) = median(&mut gaps.clone()) {
        for (w, gap) in samples.windows(2).zip(gaps.drain(..)) {
            if gap > GAP_FACTOR * median_ms {
                warnings.push(RunWarning::SampleGap {
                    after_ms: w[0].t_ms,
                    gap_ms: gap,
                    median_ms,
                });
            }
        }
    }

    if options.require_clocks {
        let missing = samples.iter().filter(|s| s.core_clock.is_none()).count();
        if missing > 0 {
            warnings.push(RunWarning::MissingClock { samples: missing });
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{KernelInterval, Mhz};

    fn uniform(n: usize, period: f64) -> Vec<PowerSample> {
        (0..n)
            .map(|i| PowerSample::new(i as f64 * period, 50.0).with_clocks(Some(Mhz(945.0)), None))
            .collect()
    }

    fn trace(start: f64, end: f64) -> TraceLog {
        TraceLog::new("t", vec![KernelInterval::new(start, end, "fft").unwrap()])
    }

    #[test]
    fn covered_uniform_run_is_clean() {
        let w = validate_run(&uniform(101, 10.0), &trace(100.0, 900.0), ValidateOptions { require_clocks: true });
        assert!(w.is_empty(), "{w:?}");
    }

    #[test]
    fn interval_beyond_last_sample() {
        let w = validate_run(&uniform(11, 10.0), &trace(50.0, 150.0), ValidateOptions::default());
        assert_eq!(w.len(), 1);
        assert!(w[0].to_string().starts_with("trace exceeds power log span"));
    }

    #[test]
    fn single_long_gap_is_found() {
        let mut samples = uniform(50, 10.0);
        // insert a 200 ms hole after t = 240 ms
        for s in samples.iter_mut().skip(25) {
            s.t_ms += 190.0;
        }
        let w = validate_run(&samples, &trace(0.0, 100.0), ValidateOptions::default());
        assert_eq!(
            w,
            vec![RunWarning::SampleGap {
                after_ms: 240.0,
                gap_ms: 200.0,
                median_ms: 10.0
            }]
        );
    }

    #[test]
    fn missing_clock_only_when_requested() {
        let samples: Vec<_> = (0..10).map(|i| PowerSample::new(i as f64, 1.0)).collect();
        let t = trace(1.0, 5.0);
        assert!(validate_run(&samples, &t, ValidateOptions::default()).is_empty());
        assert_eq!(
            validate_run(&samples, &t, ValidateOptions { require_clocks: true }),
            vec![RunWarning::MissingClock { samples: 10 }]
        );
    }
}
