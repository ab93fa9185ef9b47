//! Energy and clock-frequency analysis for GPU FFT workloads.
//!
//! The crate turns power-sampler logs and kernel-trace logs into energy and
//! efficiency figures per core-clock frequency, locates the optimal and mean
//! optimal frequencies of a sweep, and plans clock locks around pipeline
//! stages. [`synthdev`] provides a synthetic device with closed-form ground
//! truth for desk-scale testing.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod attribution;
pub mod catalog;
pub mod device;
pub mod ingest;
pub mod metrics;
pub mod rtplan;
pub mod sweep;
pub mod synthdev;
pub mod types;
pub mod workload;

pub use analysis::{analyze_run, RunAnalysis};
pub use attribution::{FrequencyStatus, FrequencyVerdict, LocalizedKernel};
pub use catalog::Catalog;
pub use device::{DeviceSpec, ReferenceClock};
pub use ingest::{PowerLog, PowerLogFormat, TraceLog};
pub use metrics::{EnergyReport, ErrorEstimate};
pub use rtplan::{FrequencyPlan, PipelineStage, RealTimeBudget};
pub use sweep::{Behavior, SweepPoint, SweepResult, TradeoffCell};
pub use types::{KernelInterval, Mhz, PowerSample, Precision};
pub use workload::{FftAlgorithm, FftConfig};

/// Errors from the domain types, device catalog and workload math.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("frequency grid of {device} does not terminate at f_min {f_min} MHz (stepped to {reached} MHz); supply an explicit frequency list")]
    GridMismatch {
        device: String,
        f_min: Mhz,
        reached: Mhz,
    },
    #[error("memory budget of {budget} bytes cannot hold one FFT of {needed} bytes")]
    BatchTooSmall { budget: u64, needed: u64 },
    #[error("invalid duration {0} s; must be positive")]
    InvalidDuration(f64),
    #[error("invalid FFT configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid device spec {device}: {reason}")]
    InvalidDevice { device: String, reason: String },
    #[error("device {device} has no {clock} clock")]
    NoReferenceClock { device: String, clock: ReferenceClock },
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("device {0} not found in catalog")]
    UnknownDevice(String),
}
