use serde::Serialize;

use super::execute::ExecutionTrace;
use crate::skeleton::AngleJointId;

/// Per-frame error statistics over the seven joints (setpoint − achieved).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorStats {
    /// Signed mean error.
    pub signed: f64,
    /// Mean absolute error.
    pub abs: f64,
    /// Population standard deviation of the per-joint errors.
    pub std: f64,
}

impl ErrorStats {
    pub fn from_errors(errors: &[f64]) -> Self {
        if errors.is_empty() {
            return Self::default();
        }
        let n = errors.len() as f64;
        let signed = errors.iter().sum::<f64>() / n;
        let abs = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - signed).powi(2)).sum::<f64>() / n;
        Self {
            signed,
            abs,
            std: var.sqrt(),
        }
    }
}

/// Signed average joint error at frame `t`.
pub fn average_error(trace: &ExecutionTrace, t: usize) -> f64 {
    trace.steps()[t].stats.signed
}

pub fn average_abs_error(trace: &ExecutionTrace, t: usize) -> f64 {
    trace.steps()[t].stats.abs
}

pub fn error_std(trace: &ExecutionTrace, t: usize) -> f64 {
    trace.steps()[t].stats.std
}

/// Whole-trajectory reproduction summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub frames: usize,
    /// Mean over frames of |signed average error|.
    pub mean_abs_error: f64,
    /// Max over frames of |signed average error|.
    pub max_abs_error: f64,
    /// Mean over frames of the mean absolute joint error.
    pub mean_joint_abs_error: f64,
    /// Root-mean-square error per joint, in [`AngleJointId::ALL`] order.
    pub per_joint_rms: [f64; 7],
    pub timeouts: usize,
    pub total_iterations: usize,
    pub total_ticks: usize,
}

pub fn summarize(trace: &ExecutionTrace) -> TraceSummary {
    let steps = trace.steps();
    let frames = steps.len();
    let denom = frames.max(1) as f64;
    let mean_abs_error = steps.iter().map(|s| s.stats.signed.abs()).sum::<f64>() / denom;
    let max_abs_error = steps
        .iter()
        .map(|s| s.stats.signed.abs())
        .fold(0.0, f64::max);
    let mean_joint_abs_error = steps.iter().map(|s| s.stats.abs).sum::<f64>() / denom;
    let per_joint_rms = AngleJointId::ALL.map(|j| {
        let ss: f64 = steps.iter().map(|s| s.joints[j.index()].error().powi(2)).sum();
        (ss / denom).sqrt()
    });
    TraceSummary {
        frames,
        mean_abs_error,
        max_abs_error,
        mean_joint_abs_error,
        per_joint_rms,
        timeouts: steps
            .iter()
            .flat_map(|s| s.joints.iter())
            .filter(|j| j.timed_out)
            .count(),
        total_iterations: steps
            .iter()
            .flat_map(|s| s.joints.iter())
            .map(|j| j.iterations)
            .sum(),
        total_ticks: steps.iter().map(|s| s.ticks).sum(),
    }
}
