//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed under a plain
//! `cargo test`. The process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dvfs_core::analysis::analyze_run;
use dvfs_core::attribution::{check_sampling_criterion, verify_clocks, FrequencyStatus};
use dvfs_core::ingest::{parse_smi_csv, write_smi_csv};
use dvfs_core::metrics::{efficiency, energy, propagate_increase_error, EnergyReport};
use dvfs_core::rtplan::{build_clock_plan, expected_pipeline_gain, required_hardware_scale, PipelineStage};
use dvfs_core::sweep::{
    classify_behavior, mean_optimal_frequency, optimal_frequency, tradeoff_matrix, BehaviorThresholds, SweepPoint,
};
use dvfs_core::synthdev::{
    analytic_energy, analytic_optimum, canonical_time_models, simulate_run, simulate_run_with, PowerModel,
    RunOptions, SamplerModel, TimeModel,
};
use dvfs_core::workload::{n_fft, FftConfig};
use dvfs_core::{
    Behavior, Catalog, CoreError, DeviceSpec, FrequencyVerdict, Mhz, PowerSample, Precision, ReferenceClock,
    SweepResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GIB: u64 = 1 << 30;
const INSTANCES: u64 = 50;
const ALIGNED_TOL: f64 = 1e-6;
const JITTER_TOL: f64 = 0.02;
/// Positions in the V100 grid swept per instance.
const SWEEP_POSITIONS: [usize; 5] = [0, 40, 80, 120, 160];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn v100() -> DeviceSpec {
    Catalog::builtin().device("v100").unwrap().clone()
}

fn config() -> FftConfig {
    FftConfig::new(16384, Precision::Fp32, 2 * GIB, 1).unwrap()
}

fn swept_grid() -> Vec<Mhz> {
    let grid = v100().allowed_frequencies().unwrap();
    SWEEP_POSITIONS.iter().map(|&i| grid[i]).collect()
}

/// Seeded device instance with an interior or boundary energy optimum.
fn instance(seed: u64) -> (PowerModel, TimeModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed);
    let power = PowerModel {
        p_static: rng.random_range(20.0..60.0),
        k_lin: rng.random_range(0.0..0.05),
        k_dyn: rng.random_range(1e-9..5e-8),
    };
    let time = TimeModel::new(
        rng.random_range(1.0..2.5),
        rng.random_range(300.0..1400.0),
        rng.random_range(100.0..300.0),
        rng.random_range(1.0..3.0),
    );
    (power, time)
}

fn measure(power: &PowerModel, time: &TimeModel, sampler: &SamplerModel, f: Mhz) -> Result<SweepPoint, String> {
    let run = simulate_run(power, time, sampler, f).map_err(|e| e.to_string())?;
    let a = analyze_run(&run.samples, &run.trace, &config(), f, Mhz(8.0)).map_err(|e| e.to_string())?;
    Ok(SweepPoint::new(f, a.report, a.verdict))
}

fn energy_oracle() -> Check {
    let grid = swept_grid();
    let (mut worst_aligned, mut worst_jitter) = (0.0f64, 0.0f64);
    for seed in 0..INSTANCES {
        let (p, t) = instance(seed);
        for (k, &f) in grid.iter().enumerate() {
            let truth = analytic_energy(&p, &t, f);
            let aligned = measure(&p, &t, &SamplerModel::aligned(10.0), f)?.energy_j;
            let jittered = measure(&p, &t, &SamplerModel::driver_like(seed * 16 + k as u64), f)?.energy_j;
            worst_aligned = worst_aligned.max((aligned - truth).abs() / truth);
            worst_jitter = worst_jitter.max((jittered - truth).abs() / truth);
        }
    }
    ensure(worst_aligned <= ALIGNED_TOL, || format!("aligned rel error {worst_aligned:.3e} > {ALIGNED_TOL:e}"))?;
    ensure(worst_jitter <= JITTER_TOL, || format!("jittered rel error {worst_jitter:.4} > {JITTER_TOL}"))?;
    Ok(format!(
        "{} runs; worst rel error aligned {worst_aligned:.2e}, jittered {worst_jitter:.4}",
        2 * INSTANCES as usize * grid.len()
    ))
}

fn optimum_recovery() -> Check {
    let grid = swept_grid();
    let device = v100();
    let mut exact = 0;
    for seed in 0..INSTANCES {
        let (p, t) = instance(seed);
        let points = grid
            .iter()
            .enumerate()
            .map(|(k, &f)| measure(&p, &t, &SamplerModel::driver_like(1000 + seed * 16 + k as u64), f))
            .collect::<Result<Vec<_>, _>>()?;
        let sweep = SweepResult::build(config(), points, &device, BehaviorThresholds::default())
            .map_err(|e| e.to_string())?;
        let measured = optimal_frequency(&sweep.points).map_err(|e| e.to_string())?;
        let truth = analytic_optimum(&p, &t, &grid).ok_or("empty grid")?;
        let pos = |f: Mhz| grid.iter().position(|g| g.same_as(f)).unwrap();
        let gap = pos(measured).abs_diff(pos(truth));
        ensure(gap <= 1, || format!("instance {seed}: measured {measured} MHz, analytic {truth} MHz"))?;
        exact += usize::from(gap == 0);
    }
    Ok(format!("{exact}/{INSTANCES} exact, all within one grid step"))
}

fn published_constants() -> Check {
    let batch = n_fft(&FftConfig {
        fft_length: 16384,
        precision: Precision::Fp32,
        memory_bytes: 2 * GIB,
        batches: 1,
    })
    .map_err(|e| e.to_string())?;
    ensure(batch == 16384, || format!("n_fft = {batch}"))?;
    let e5 = propagate_increase_error(0.05);
    ensure((0.0700..=0.0715).contains(&e5), || format!("error(0.05) = {e5}"))?;
    let e15 = propagate_increase_error(0.15);
    ensure((0.210..=0.213).contains(&e15), || format!("error(0.15) = {e15}"))?;
    ensure(check_sampling_criterion(14.2, 15.0), || "14.2 ms rejected".into())?;
    let gain = expected_pipeline_gain(&[
        PipelineStage::new("fft", 0.6).gain(0.5),
        PipelineStage::new("rest", 0.4),
    ])
    .map_err(|e| e.to_string())?;
    ensure((gain - 0.30).abs() <= 1e-12, || format!("pipeline gain {gain}"))?;
    let s60 = required_hardware_scale(60.0, 1.0);
    let s100 = required_hardware_scale(100.0, 1.0);
    ensure((s60 - 1.6).abs() <= 1e-12 && (s100 - 2.0).abs() <= 1e-12, || format!("scales {s60}, {s100}"))?;
    Ok(format!("n_fft {batch}, errors {e5:.4}/{e15:.4}, gain {gain:.2}, scales {s60}/{s100}"))
}

fn cap_detection() -> Check {
    let titan = Catalog::builtin().device("titan-v").unwrap().clone();
    let requested = Mhz(1912.0);
    ensure(titan.is_on_grid(requested).unwrap_or(false), || "1912 MHz not on the Titan V grid".into())?;
    let p = PowerModel { p_static: 40.0, k_lin: 0.05, k_dyn: 1e-8 };
    let t = TimeModel::new(0.5, 800.0, 200.0, 2.0);
    let opts = RunOptions {
        clock_cap: Some(Mhz(1335.0)),
        ..RunOptions::default()
    };
    let run = simulate_run_with(&p, &t, &SamplerModel::driver_like(4), requested, &opts).map_err(|e| e.to_string())?;
    let tol = titan.default_tolerance().map_err(|e| e.to_string())?;
    let a = analyze_run(&run.samples, &run.trace, &config(), requested, tol).map_err(|e| e.to_string())?;
    ensure(a.verdict.status == FrequencyStatus::Capped, || format!("status {:?}", a.verdict.status))?;
    ensure(a.verdict.achieved_mode == Mhz(1335.0), || format!("mode {}", a.verdict.achieved_mode))?;
    // raw-sample path agrees with the analysis path
    let direct = verify_clocks(&run.samples, requested, tol).map_err(|e| e.to_string())?;
    ensure(direct.status == FrequencyStatus::Capped, || "raw samples not capped".into())?;
    Ok(format!("verdict Capped({}) at share {:.2}", a.verdict.achieved_mode, a.verdict.mode_share))
}

fn grid_generation() -> Check {
    let catalog = Catalog::builtin();
    let jetson = catalog.device("jetson-nano").unwrap().allowed_frequencies().map_err(|e| e.to_string())?;
    ensure(jetson.len() == 12, || format!("Jetson grid has {} entries", jetson.len()))?;
    ensure(jetson[0] == Mhz(921.6) && jetson[11].same_as(Mhz(76.8)), || {
        format!("Jetson endpoints {} and {}", jetson[0], jetson[11])
    })?;
    let mut notes = Vec::new();
    for (device, grid) in catalog.grid_report() {
        match grid {
            Ok(g) => {
                ensure(g[0] == device.f_max && g.last().unwrap().same_as(device.f_min), || {
                    format!("{} grid ends at {}", device.name, g.last().unwrap())
                })?;
                notes.push(format!("{} {}", device.key, g.len()));
            }
            Err(CoreError::GridMismatch { .. }) => {
                let mut fixed = device.clone();
                let mut list: Vec<Mhz> = vec![device.f_max, device.f_min];
                list.extend(device.mean_optimal.fp32);
                fixed.frequencies = Some(list);
                let g = fixed.allowed_frequencies().map_err(|e| format!("{}: fallback failed: {e}", device.name))?;
                ensure(g[0] == device.f_max && *g.last().unwrap() == device.f_min, || {
                    format!("{} fallback endpoints", device.name)
                })?;
                notes.push(format!("{} mismatch+list", device.key));
            }
            Err(e) => return Err(format!("{}: {e}", device.name)),
        }
    }
    for name in ["v100", "titan-v"] {
        let d = catalog.device(name).unwrap();
        ensure(d.allowed_frequencies().is_ok(), || format!("{name} grid does not terminate"))?;
    }
    Ok(notes.join(", "))
}

fn behavior_classes() -> Check {
    let device = v100();
    let grid = device.allowed_frequencies().unwrap();
    let expected = [Behavior::A, Behavior::B, Behavior::C];
    for (model, want) in canonical_time_models(device.f_max.0).iter().zip(expected) {
        for scale in [1.0, 0.125, 3.0, 1e3] {
            let curve: Vec<(Mhz, f64)> = grid.iter().map(|&f| (f, scale * model.time(f))).collect();
            let got = classify_behavior(&curve, scale * model.time(device.f_max), BehaviorThresholds::default())
                .map_err(|e| e.to_string())?;
            ensure(got == want, || format!("expected {want:?}, got {got:?} at scale {scale}"))?;
        }
    }
    Ok("A, B, C; unchanged under 4 time scalings".into())
}

fn mean_optimal_snapping() -> Check {
    let catalog = Catalog::builtin();
    let mut sets: Vec<(DeviceSpec, Vec<Mhz>)> = vec![
        (v100(), vec![Mhz(945.0), Mhz(952.0), Mhz(938.0)]),
        (v100(), vec![Mhz(945.0), Mhz(952.0)]),
        (catalog.device("jetson-nano").unwrap().clone(), vec![Mhz(460.8), Mhz(537.6), Mhz(844.8)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let d = if rng.random_bool(0.5) { v100() } else { catalog.device("titan-v").unwrap().clone() };
        let grid = d.allowed_frequencies().unwrap();
        let n = rng.random_range(1..12);
        let optima = (0..n).map(|_| grid[rng.random_range(0..grid.len())]).collect();
        sets.push((d, optima));
    }
    for (device, optima) in &sets {
        let grid = device.allowed_frequencies().unwrap();
        let pairs: Vec<(u64, Mhz)> = optima.iter().enumerate().map(|(i, &f)| (i as u64, f)).collect();
        let f = mean_optimal_frequency(&pairs, &grid, |_| false).map_err(|e| e.to_string())?;
        ensure(grid.contains(&f), || format!("{f} not on the {} grid", device.name))?;
        let mean = optima.iter().map(|m| m.0).sum::<f64>() / optima.len() as f64;
        // exhaustive search over every grid member
        let best = grid.iter().map(|g| (g.0 - mean).abs()).fold(f64::INFINITY, f64::min);
        ensure((f.0 - mean).abs() <= best + 1e-9, || format!("{f} is not nearest to mean {mean}"))?;
    }
    let fixture = mean_optimal_frequency(
        &[(1, Mhz(945.0)), (2, Mhz(952.0)), (3, Mhz(938.0))],
        &v100().allowed_frequencies().unwrap(),
        |_| false,
    )
    .map_err(|e| e.to_string())?;
    ensure(fixture == Mhz(945.0), || format!("fixture snapped to {fixture}"))?;
    Ok(format!("{} sets; fixture {{945, 952, 938}} -> {fixture}", sets.len()))
}

fn plan_validity() -> Check {
    let device = v100();
    let grid = device.allowed_frequencies().unwrap();
    let choices = [grid[0], grid[40], grid[78], grid[78], grid[100]];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut coalesced = 0;
    for p in 0..100 {
        let n = rng.random_range(1..16);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let stages: Vec<PipelineStage> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let s = PipelineStage::new(&format!("p{p}s{i}"), w / total);
                if rng.random_bool(0.6) {
                    s.locked(choices[rng.random_range(0..choices.len())].0)
                } else {
                    s
                }
            })
            .collect();
        let plan = build_clock_plan(&stages, &device).map_err(|e| e.to_string())?;
        ensure(plan.is_balanced() && plan.lock_count() == plan.reset_count(), || format!("pipeline {p} unbalanced"))?;
        let want: Vec<Option<Mhz>> = stages.iter().map(|s| s.locked_frequency).collect();
        ensure(plan.effective_locks(&stages) == want, || format!("pipeline {p} changes locked stages"))?;
        let locked = want.iter().filter(|w| w.is_some()).count();
        coalesced += locked - plan.lock_count();
    }
    Ok(format!("100 pipelines balanced; {coalesced} locks coalesced"))
}

fn metric_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c_p = rng.random_range(1e9..1e14);
        let t = rng.random_range(1e-3..100.0);
        let e = rng.random_range(1e-2..1e5);
        let eff = efficiency(c_p, t, e).map_err(|e| e.to_string())?;
        worst = worst.max((eff * e - c_p * t).abs() / (c_p * t));
        let r = EnergyReport::new(e, t, c_p).map_err(|e| e.to_string())?;
        worst = worst.max((r.efficiency_flops_per_w * r.energy_j - c_p * t).abs() / (c_p * t));
    }
    ensure(worst <= 1e-12, || format!("efficiency identity off by {worst:e}"))?;

    // products P * dt are multiples of 1000 J ms, so every sum is exact
    let samples: Vec<PowerSample> = (0..64)
        .map(|i| PowerSample::new(8.0 * i as f64, 125.0 * rng.random_range(0..16) as f64))
        .collect();
    let whole = energy(&samples).map_err(|e| e.to_string())?;
    for cut in 1..samples.len() - 1 {
        let parts = energy(&samples[..=cut]).unwrap() + energy(&samples[cut..]).unwrap();
        ensure(parts == whole, || format!("split at {cut}: {parts} != {whole}"))?;
    }

    let device = v100();
    let boost = device.reference_frequency(ReferenceClock::Boost).unwrap();
    let grid = device.allowed_frequencies().unwrap();
    let (p, t) = instance(3);
    let points = [boost, grid[40], grid[80]]
        .iter()
        .map(|&f| {
            let report = EnergyReport::new(analytic_energy(&p, &t, f), t.time(f), 1e12 / t.time(f)).unwrap();
            let verdict = FrequencyVerdict {
                requested: f,
                achieved_mode: f,
                status: FrequencyStatus::Ok,
                mode_share: 1.0,
            };
            SweepPoint::new(f, report, verdict)
        })
        .collect();
    let sweep = SweepResult::build(config(), points, &device, BehaviorThresholds::default()).map_err(|e| e.to_string())?;
    let cells = tradeoff_matrix(&[sweep], &device, ReferenceClock::Boost).map_err(|e| e.to_string())?;
    let own = cells.iter().find(|c| c.frequency.same_as(boost)).ok_or("no reference cell")?;
    ensure(own.efficiency_gain_pct == 0.0 && own.time_increase_pct == 0.0, || {
        format!("reference cell ({}, {})", own.efficiency_gain_pct, own.time_increase_pct)
    })?;
    Ok(format!("identity within {worst:.1e}; {} exact splits; reference cell (0%, 0%)", samples.len() - 2))
}

fn parser_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rows = 0;
    for set in 0..1000 {
        let n = rng.random_range(1..50);
        let mut t = rng.random_range(0.0..2e12);
        let samples: Vec<PowerSample> = (0..n)
            .map(|_| {
                t += rng.random_range(0.0..50.0);
                let core = rng.random_bool(0.8).then(|| Mhz(rng.random_range(76.8..2000.0)));
                let mem = rng.random_bool(0.8).then(|| Mhz(rng.random_range(100.0..10000.0)));
                PowerSample::new(t, rng.random_range(0.0..500.0)).with_clocks(core, mem)
            })
            .collect();
        let parsed = parse_smi_csv(&write_smi_csv(&samples)).map_err(|e| format!("set {set}: {e}"))?;
        ensure(parsed == samples, || format!("set {set} differs after round trip"))?;
        rows += n;
    }
    Ok(format!("1000 sets, {rows} rows identical"))
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("energy oracle equivalence", Duration::from_secs(10), energy_oracle),
        ("optimal-frequency recovery", Duration::from_secs(5), optimum_recovery),
        ("published constants", Duration::from_secs(1), published_constants),
        ("cap detection", Duration::from_secs(1), cap_detection),
        ("grid generation", Duration::from_secs(1), grid_generation),
        ("behavior classification", Duration::from_secs(1), behavior_classes),
        ("mean-optimal snapping", Duration::from_secs(1), mean_optimal_snapping),
        ("plan validity", Duration::from_secs(2), plan_validity),
        ("metric identities", Duration::from_secs(1), metric_identities),
        ("parser round trip", Duration::from_secs(2), parser_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= *limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
