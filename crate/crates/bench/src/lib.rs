//! Fixtures shared by the benchmarks.

use dvfs_core::synthdev::{simulate_run, PowerModel, SamplerModel, SimulatedRun, TimeModel};
use dvfs_core::{DeviceSpec, FftConfig, Mhz, PipelineStage, Precision};

pub fn power_model() -> PowerModel {
    PowerModel {
        p_static: 40.0,
        k_lin: 0.03,
        k_dyn: 2e-8,
    }
}

/// A run of `seconds` at 945 MHz sampled by the driver-like sampler.
pub fn long_run(seconds: f64) -> SimulatedRun {
    let time = TimeModel::new(seconds, 0.0, 0.0, 1.0);
    simulate_run(&power_model(), &time, &SamplerModel::driver_like(1), Mhz(945.0)).expect("valid model")
}

pub fn v100() -> DeviceSpec {
    let mut d = DeviceSpec::stepped("Tesla V100", 1530.0, 135.0, &[8.0, 7.0]);
    d.boost_clock = Mhz(1455.0);
    d.base_clock = Some(Mhz(1200.0));
    d
}

pub fn config() -> FftConfig {
    FftConfig::new(16384, Precision::Fp32, 1 << 31, 1).expect("valid config")
}

/// `n` stages alternating between two locked clocks and unlocked work.
pub fn pipeline(n: usize) -> Vec<PipelineStage> {
    let share = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let s = PipelineStage::new(&format!("stage{i}"), share);
            match i % 3 {
                0 => s.locked(945.0),
                1 => s.locked(1530.0),
                _ => s,
            }
        })
        .collect()
}
