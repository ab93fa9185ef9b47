//! FFT workload math: batch sizing, the FLOP model and length classification.

use serde::{Deserialize, Serialize};

use crate::types::Precision;
use crate::CoreError;

/// Largest prime the Cooley-Tukey path of the FFT library handles.
pub const LARGEST_RADIX_PRIME: u64 = 127;

/// One FFT benchmark configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FftConfig {
    /// Transform length in complex points.
    pub fft_length: u64,
    pub precision: Precision,
    /// Input data budget in bytes.
    pub memory_bytes: u64,
    /// Number of repeated runs over the batch.
    pub batches: u64,
}

impl FftConfig {
    pub fn new(fft_length: u64, precision: Precision, memory_bytes: u64, batches: u64) -> Result<Self, CoreError> {
        let config = FftConfig {
            fft_length,
            precision,
            memory_bytes,
            batches,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.fft_length < 2 {
            return Err(CoreError::InvalidConfig(format!("FFT length {} < 2", self.fft_length)));
        }
        if self.batches < 1 {
            return Err(CoreError::InvalidConfig("at least one run is required".into()));
        }
        if self.precision == Precision::Fp16 && !self.fft_length.is_power_of_two() {
            return Err(CoreError::InvalidConfig(format!(
                "FP16 transforms support power-of-two lengths only, got {}",
                self.fft_length
            )));
        }
        let needed = self.transform_bytes();
        if self.memory_bytes < needed {
            return Err(CoreError::BatchTooSmall {
                budget: self.memory_bytes,
                needed,
            });
        }
        Ok(())
    }

    /// Bytes occupied by one transform's input.
    pub fn transform_bytes(&self) -> u64 {
        self.fft_length.saturating_mul(self.precision.complex_bytes())
    }
}

/// Number of transforms that fit in the memory budget (floored).
pub fn n_fft(config: &FftConfig) -> Result<u64, CoreError> {
    let needed = config.transform_bytes();
    if needed == 0 || config.memory_bytes < needed {
        return Err(CoreError::BatchTooSmall {
            budget: config.memory_bytes,
            needed,
        });
    }
    Ok(config.memory_bytes / needed)
}

/// Computational performance `5 N log2(N) N_b N_FFT / t`, in FLOPS.
pub fn flops(config: &FftConfig, t_s: f64) -> Result<f64, CoreError> {
    flops_raw(config.fft_length, config.batches, n_fft(config)?, t_s)
}

/// [`flops`] with the transform count supplied directly.
pub fn flops_raw(fft_length: u64, batches: u64, transforms: u64, t_s: f64) -> Result<f64, CoreError> {
    if !(t_s > 0.0) || !t_s.is_finite() {
        return Err(CoreError::InvalidDuration(t_s));
    }
    let n = fft_length as f64;
    Ok(5.0 * n * n.log2() * batches as f64 * transforms as f64 / t_s)
}

/// Total floating-point operations of the workload, `C_p * t`.
pub fn total_flop(config: &FftConfig) -> Result<f64, CoreError> {
    let n = config.fft_length as f64;
    Ok(5.0 * n * n.log2() * config.batches as f64 * n_fft(config)? as f64)
}

/// Which FFT algorithm the library picks for a length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FftAlgorithm {
    CooleyTukey,
    Bluestein,
}

/// Cooley-Tukey when every prime factor of `n` is at most 127.
pub fn classify_fft_length(n: u64) -> FftAlgorithm {
    let mut rest = n;
    let mut p = 2;
    while p <= LARGEST_RADIX_PRIME && rest > 1 {
        while rest.is_multiple_of(p) {
            rest /= p;
        }
        p += 1;
    }
    if rest == 1 {
        FftAlgorithm::CooleyTukey
    } else {
        FftAlgorithm::Bluestein
    }
}

pub fn is_bluestein(n: u64) -> bool {
    classify_fft_length(n) == FftAlgorithm::Bluestein
}

/// Time of a single transform within a batch, `t_fix / N_FFT`.
pub fn single_fft_time(t_fix_s: f64, n_fft: u64) -> f64 {
    assert!(n_fft >= 1, "a batch holds at least one transform");
    t_fix_s / n_fft as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    const GIB: u64 = 1 << 30;

    #[test]
    fn batch_of_16384_for_2gib_fp32() {
        let c = FftConfig::new(16384, Precision::Fp32, 2 * GIB, 1).unwrap();
        assert_eq!(n_fft(&c).unwrap(), 16384);
    }

    #[test]
    fn exact_fit_is_one_transform() {
        let c = FftConfig::new(1000, Precision::Fp64, 16_000, 1).unwrap();
        assert_eq!(n_fft(&c).unwrap(), 1);
    }

    #[test]
    fn one_gib_fp64_1024() {
        let c = FftConfig::new(1024, Precision::Fp64, GIB, 1).unwrap();
        assert_eq!(n_fft(&c).unwrap(), 65536);
    }

    #[test]
    fn non_divisible_budget_floors() {
        let c = FftConfig::new(3, Precision::Fp32, 50, 1).unwrap();
        assert_eq!(n_fft(&c).unwrap(), 2);
    }

    #[test]
    fn undersized_budget_is_rejected() {
        assert!(matches!(
            FftConfig::new(1024, Precision::Fp32, 8191, 1),
            Err(CoreError::BatchTooSmall { budget: 8191, needed: 8192 })
        ));
        let raw = FftConfig {
            fft_length: 1024,
            precision: Precision::Fp32,
            memory_bytes: 10,
            batches: 1,
        };
        assert!(matches!(n_fft(&raw), Err(CoreError::BatchTooSmall { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(FftConfig::new(1, Precision::Fp32, GIB, 1).is_err());
        assert!(FftConfig::new(16, Precision::Fp32, GIB, 0).is_err());
        assert!(FftConfig::new(24, Precision::Fp16, GIB, 1).is_err());
        assert!(FftConfig::new(32, Precision::Fp16, GIB, 1).is_ok());
    }

    #[test]
    fn flops_direct_formula() {
        assert_eq!(flops_raw(2, 1, 1, 1.0).unwrap(), 10.0);
        assert_eq!(flops_raw(1024, 1, 1, 1.0).unwrap(), 51200.0);
        // 5 * 16384 * 14 * 10 * 16384 / 0.5, evaluated independently
        assert_eq!(flops_raw(16384, 10, 16384, 0.5).unwrap(), 375_809_638_400.0);
        let c = FftConfig::new(16384, Precision::Fp32, 2 * GIB, 10).unwrap();
        assert_eq!(flops(&c, 0.5).unwrap(), 375_809_638_400.0);
    }

    #[test]
    fn flops_rejects_non_positive_time() {
        assert!(matches!(flops_raw(2, 1, 1, 0.0), Err(CoreError::InvalidDuration(_))));
        assert!(matches!(flops_raw(2, 1, 1, -1.0), Err(CoreError::InvalidDuration(_))));
        assert!(flops_raw(2, 1, 1, f64::NAN).is_err());
    }

    #[test]
    fn length_classification() {
        assert_eq!(classify_fft_length(16384), FftAlgorithm::CooleyTukey);
        assert_eq!(classify_fft_length(139 * 139), FftAlgorithm::Bluestein);
        assert_eq!(classify_fft_length(254), FftAlgorithm::CooleyTukey);
        assert_eq!(classify_fft_length(127), FftAlgorithm::CooleyTukey);
        assert_eq!(classify_fft_length(131), FftAlgorithm::Bluestein);
        assert_eq!(classify_fft_length(2 * 131), FftAlgorithm::Bluestein);
    }

    #[test]
    fn single_fft_times() {
        assert_eq!(single_fft_time(1.0, 1), 1.0);
        assert_eq!(single_fft_time(0.5, 16384), 3.0517578125e-5);
        assert_eq!(single_fft_time(0.0, 7), 0.0);
    }
}
