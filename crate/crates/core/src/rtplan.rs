//! Real-time budgets and clock-lock plans for processing pipelines.
//!
//! A [`FrequencyPlan`] is a document for an external executor. Each entry is
//! `{stage, action, min_mhz, max_mhz}`: a `lock` entry applies before its
//! stage runs, a `reset` entry after its stage finishes. Entries must be
//! applied one at a time, in order.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::types::Mhz;
use crate::CoreError;

/// Tolerance on the sum of stage time fractions.
pub const FRACTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),
    #[error("stage {stage}: {frequency} MHz is not on the {device} clock grid")]
    OffGrid { stage: String, frequency: Mhz, device: String },
    #[error(transparent)]
    Device(#[from] CoreError),
    #[error("invalid plan document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealTimeBudget {
    /// Time to acquire a block of data, in seconds.
    pub t_acquire: f64,
    /// Time to process that block, in seconds.
    pub t_process: f64,
}

impl RealTimeBudget {
    pub fn new(t_acquire: f64, t_process: f64) -> Result<Self, PlanError> {
        if !(t_acquire > 0.0 && t_process > 0.0) || !t_acquire.is_finite() || !t_process.is_finite() {
            return Err(PlanError::InvalidPipeline(format!(
                "acquire and process times must be positive, got {t_acquire} s and {t_process} s"
            )));
        }
        Ok(RealTimeBudget { t_acquire, t_process })
    }

    pub fn is_real_time(&self) -> bool {
        speedup(self) >= 1.0
    }
}

/// Real-time speed-up `S = t_acquire / t_process`.
pub fn speedup(budget: &RealTimeBudget) -> f64 {
    budget.t_acquire / budget.t_process
}

/// Hardware multiplier needed to stay real-time after slowing down by
/// `time_increase_pct`, for a pipeline with speed-up buffer `buffer_s`.
/// Assumes the work splits evenly across devices.
pub fn required_hardware_scale(time_increase_pct: f64, buffer_s: f64) -> f64 {
    ((1.0 + time_increase_pct / 100.0) / buffer_s).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStage {
    pub name: String,
    /// Fraction of total pipeline execution time.
    pub time_fraction: f64,
    #[serde(default, rename = "locked_mhz", skip_serializing_if = "Option::is_none")]
    pub locked_frequency: Option<Mhz>,
    /// Efficiency increase of this stage when locked, as a fraction (0.5 = 50%).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_gain: Option<f64>,
}

impl PipelineStage {
    pub fn new(name: &str, time_fraction: f64) -> Self {
        PipelineStage {
            name: name.to_string(),
            time_fraction,
            locked_frequency: None,
            expected_gain: None,
        }
    }

    pub fn locked(mut self, f: f64) -> Self {
        self.locked_frequency = Some(Mhz(f));
        self
    }

    pub fn gain(mut self, g: f64) -> Self {
        self.expected_gain = Some(g);
        self
    }
}

pub fn validate_pipeline(stages: &[PipelineStage]) -> Result<(), PlanError> {
    if stages.is_empty() {
        return Err(PlanError::InvalidPipeline("no stages".into()));
    }
    if let Some(s) = stages.iter().find(|s| !(s.time_fraction >= 0.0) || !s.time_fraction.is_finite()) {
        return Err(PlanError::InvalidPipeline(format!(
            "stage {} has time fraction {}",
            s.name, s.time_fraction
        )));
    }
    let sum: f64 = stages.iter().map(|s| s.time_fraction).sum();
    if (sum - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(PlanError::InvalidPipeline(format!("time fractions sum to {sum}, not 1")));
    }
    Ok(())
}

/// First-order efficiency increase: time-fraction-weighted sum of stage gains.
pub fn expected_pipeline_gain(stages: &[PipelineStage]) -> Result<f64, PlanError> {
    validate_pipeline(stages)?;
    Ok(stages
        .iter()
        .map(|s| s.time_fraction * s.expected_gain.unwrap_or(0.0))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClockAction {
    Lock { min: Mhz, max: Mhz },
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockCommand {
    pub stage: String,
    pub action: ClockAction,
}

/// One plan entry as written to the plan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub stage: String,
    pub action: String,
    pub min_mhz: Option<Mhz>,
    pub max_mhz: Option<Mhz>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyPlan {
    pub commands: Vec<ClockCommand>,
}

impl FrequencyPlan {
    pub fn lock_count(&self) -> usize {
        self.commands.iter().filter(|c| matches!(c.action, ClockAction::Lock { .. })).count()
    }

    pub fn reset_count(&self) -> usize {
        self.commands.len() - self.lock_count()
    }

    /// Locks never nest and every lock is reset before the plan ends.
    pub fn is_balanced(&self) -> bool {
        let mut depth = 0i32;
        for c in &self.commands {
            depth += match c.action {
                ClockAction::Lock { .. } => 1,
                ClockAction::Reset => -1,
            };
            if !(0..=1).contains(&depth) {
                return false;
            }
        }
        depth == 0
    }

    /// The clock each stage runs under when the plan is applied in order.
    pub fn effective_locks(&self, stages: &[PipelineStage]) -> Vec<Option<Mhz>> {
        let mut current: Option<Mhz> = None;
        let mut out = Vec::with_capacity(stages.len());
        for stage in stages {
            for c in self.commands.iter().filter(|c| c.stage == stage.name) {
                if let ClockAction::Lock { min, .. } = c.action {
                    current = Some(min);
                }
            }
            out.push(current);
            for c in self.commands.iter().filter(|c| c.stage == stage.name) {
                if let ClockAction::Reset = c.action {
                    current = None;
                }
            }
        }
        out
    }

    pub fn entries(&self) -> Vec<PlanEntry> {
        self.commands
            .iter()
            .map(|c| match c.action {
                ClockAction::Lock { min, max } => PlanEntry {
                    stage: c.stage.clone(),
                    action: "lock".into(),
                    min_mhz: Some(min),
                    max_mhz: Some(max),
                },
                ClockAction::Reset => PlanEntry {
                    stage: c.stage.clone(),
                    action: "reset".into(),
                    min_mhz: None,
                    max_mhz: None,
                },
            })
            .collect()
    }

    pub fn from_entries(entries: Vec<PlanEntry>) -> Result<Self, PlanError> {
        let commands = entries
            .into_iter()
            .map(|e| {
                let action = match (e.action.as_str(), e.min_mhz, e.max_mhz) {
                    ("lock", Some(min), Some(max)) => ClockAction::Lock { min, max },
                    ("reset", _, _) => ClockAction::Reset,
                    (other, ..) => {
                        return Err(PlanError::Document(format!("stage {}: bad entry {other:?}", e.stage)))
                    }
                };
                Ok(ClockCommand { stage: e.stage, action })
            })
            .collect::<Result<_, _>>()?;
        Ok(FrequencyPlan { commands })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries()).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let entries: Vec<PlanEntry> = serde_json::from_str(text).map_err(|e| PlanError::Document(e.to_string()))?;
        Self::from_entries(entries)
    }

    /// Reference shell rendering: `nvidia-smi --lock-gpu-clocks` wraps
    /// `nvmlDeviceSetGpuLockedClocks`, `--reset-gpu-clocks` wraps
    /// `nvmlDeviceResetGpuLockedClocks`.
    pub fn to_shell_script(&self, gpu_index: u32) -> String {
        let mut out = String::from("#!/bin/sh\n# clock plan: apply entries in order, one at a time\nset -e\n");
        for c in &self.commands {
            match c.action {
                ClockAction::Lock { min, max } => {
                    let _ = writeln!(out, "# before stage {}", c.stage);
                    let _ = writeln!(out, "nvidia-smi -i {gpu_index} --lock-gpu-clocks={min},{max}");
                }
                ClockAction::Reset => {
                    let _ = writeln!(out, "# after stage {}", c.stage);
                    let _ = writeln!(out, "nvidia-smi -i {gpu_index} --reset-gpu-clocks");
                }
            }
        }
        out
    }
}

/// Locks before each run of equally-locked consecutive stages and resets
/// after it.
pub fn build_clock_plan(stages: &[PipelineStage], device: &DeviceSpec) -> Result<FrequencyPlan, PlanError> {
    let locked: Vec<&PipelineStage> = stages.iter().filter(|s| s.locked_frequency.is_some()).collect();
    if !locked.is_empty() {
        let grid = device.allowed_frequencies()?;
        for s in &locked {
            let f = s.locked_frequency.expect("filtered");
            if !grid.iter().any(|g| g.same_as(f)) {
                return Err(PlanError::OffGrid {
                    stage: s.name.clone(),
                    frequency: f,
                    device: device.name.clone(),
                });
            }
        }
    }

    let mut commands = Vec::new();
    let mut i = 0;
    while i < stages.len() {
        let Some(f) = stages[i].locked_frequency else {
            i += 1;
            continue;
        };
        let mut last = i;
        while last + 1 < stages.len() && stages[last + 1].locked_frequency.is_some_and(|g| g.same_as(f)) {
            last += 1;
        }
        commands.push(ClockCommand {
            stage: stages[i].name.clone(),
            action: ClockAction::Lock { min: f, max: f },
        });
        commands.push(ClockCommand {
            stage: stages[last].name.clone(),
            action: ClockAction::Reset,
        });
        i = last + 1;
    }
    Ok(FrequencyPlan { commands })
}
