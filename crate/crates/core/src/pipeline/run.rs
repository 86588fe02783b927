//! End-to-end pipeline: annotate → extract → retarget → guard → execute → summarize.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::annotations::{segment_sequence, AnnotationSet};
use super::config::PipelineSettings;
use super::noise::detect_noisy_frames;
use super::PipelineError;
use crate::angles::{extract_trajectory, DroppedFrame};
use crate::control::{
    open_loop_track, plant_bank, reproduce_motion, summarize, ControlError, ExecutionMode,
    ExecutionTrace, TraceSummary,
};
use crate::limits::Side;
use crate::retarget::map_trajectory;
use crate::robot::self_collision_guard;
use crate::skeleton::{AngleTrajectory, SkeletonSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct ActionReport {
    pub segment: usize,
    pub action_label: String,
    pub start_frame: usize,
    pub end_frame: usize,
    pub noisy_removed: usize,
    pub degenerate_dropped: Vec<DroppedFrame>,
    pub guard_adjusted: usize,
    /// Frames removed because no elbow angle cleared the body volume.
    pub guard_rejected: Vec<usize>,
    pub human: AngleTrajectory,
    pub robot: AngleTrajectory,
    pub trace: ExecutionTrace,
    pub summary: TraceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionFailure {
    pub segment: usize,
    pub action_label: String,
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionOutcome {
    Completed(Box<ActionReport>),
    Failed(ActionFailure),
}

impl ActionOutcome {
    pub fn completed(&self) -> Option<&ActionReport> {
        match self {
            ActionOutcome::Completed(r) => Some(r),
            ActionOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub recording_id: String,
    pub mode: ExecutionMode,
    pub total_frames: usize,
    /// Noisy frames suggested by the detector (empty when it is disabled).
    pub detected_noisy: BTreeSet<usize>,
    /// Noisy frames actually removed: annotated plus detected.
    pub removed_noisy: BTreeSet<usize>,
    pub actions: Vec<ActionOutcome>,
}

impl Report {
    pub fn empty(recording_id: impl Into<String>, mode: ExecutionMode) -> Self {
        Self {
            recording_id: recording_id.into(),
            mode,
            total_frames: 0,
            detected_noisy: BTreeSet::new(),
            removed_noisy: BTreeSet::new(),
            actions: Vec::new(),
        }
    }

    pub fn completed(&self) -> impl Iterator<Item = &ActionReport> {
        self.actions.iter().filter_map(|a| a.completed())
    }
}

fn fail(segment: usize, label: &str, stage: &'static str, err: impl ToString) -> ActionFailure {
    ActionFailure {
        segment,
        action_label: label.to_string(),
        stage,
        message: err.to_string(),
    }
}

/// Executes a robot-side trajectory with the configured controller and
/// plant. `stream` offsets the plant noise seed so that different actions
/// of one run draw independent noise.
pub fn execute_trajectory(
    robot: &AngleTrajectory,
    settings: &PipelineSettings,
    mode: ExecutionMode,
    stream: u64,
) -> Result<ExecutionTrace, ControlError> {
    let cfg = &settings.controller;
    let start = match robot.columns().first() {
        Some(first) if settings.start_at_first_setpoint => *first,
        _ => settings.initial_pose,
    };
    match mode {
        ExecutionMode::ClosedLoop => {
            let mut plants = plant_bank(
                &start,
                settings.robot_limits(),
                settings.rate_limit,
                settings.response_alpha,
                settings.measurement_noise_std,
                settings.seed.wrapping_add(stream),
            )?;
            reproduce_motion(robot, &mut plants, cfg)
        }
        ExecutionMode::OpenLoop => open_loop_track(robot, &start, cfg),
    }
}

fn run_action(
    recording: &SkeletonSequence,
    ann: &AnnotationSet,
    segment: usize,
    settings: &PipelineSettings,
    mode: ExecutionMode,
) -> Result<ActionReport, ActionFailure> {
    let spec = &ann.segments[segment];
    let label = spec.action_label.as_str();
    let seq = segment_sequence(recording, ann, segment).map_err(|e| fail(segment, label, "segment", e))?;
    let noisy_removed = (spec.start_frame..=spec.end_frame)
        .filter(|f| ann.noisy_frames.contains(f))
        .count();

    let extraction =
        extract_trajectory(&seq, &settings.extraction).map_err(|e| fail(segment, label, "extract", e))?;
    let mut human = extraction.trajectory;
    let mut robot = map_trajectory(&human, settings.human_limits(), settings.robot_limits())
        .map_err(|e| fail(segment, label, "retarget", e))?;

    let mut guard_adjusted = 0;
    let mut guard_rejected = Vec::new();
    if settings.self_collision_guard {
        let mut keep = Vec::with_capacity(robot.len());
        let mut columns = Vec::with_capacity(robot.len());
        for (i, column) in robot.columns().iter().enumerate() {
            match self_collision_guard(column, &settings.model) {
                Ok(g) => {
                    guard_adjusted += usize::from(g.adjusted);
                    keep.push(i);
                    columns.push(g.safe);
                }
                Err(_) => guard_rejected.push(i),
            }
        }
        if columns.is_empty() {
            return Err(fail(segment, label, "self-collision", "every frame collides"));
        }
        let times: Vec<f64> = keep.iter().map(|&i| robot.frame_times()[i]).collect();
        let human_cols = keep.iter().map(|&i| human.columns()[i]).collect();
        human = AngleTrajectory::new(Side::Human, label, times.clone(), human_cols)
            .map_err(|e| fail(segment, label, "self-collision", e))?;
        robot = AngleTrajectory::new(Side::Robot, label, times, columns)
            .map_err(|e| fail(segment, label, "self-collision", e))?;
    }

    let trace = execute_trajectory(&robot, settings, mode, segment as u64)
        .map_err(|e| fail(segment, label, "execute", e))?;
    let summary = summarize(&trace);
    Ok(ActionReport {
        segment,
        action_label: label.to_string(),
        start_frame: spec.start_frame,
        end_frame: spec.end_frame,
        noisy_removed,
        degenerate_dropped: extraction.dropped,
        guard_adjusted,
        guard_rejected,
        human,
        robot,
        trace,
        summary,
    })
}

/// Runs every annotated action of a recording. Without annotations the
/// whole recording is one action named after the recording.
///
/// Invalid annotations abort the run; failures inside a single action are
/// reported in its [`ActionOutcome`] and the remaining actions still run.
pub fn run_pipeline(
    recording_id: &str,
    recording: &SkeletonSequence,
    annotations: Option<&AnnotationSet>,
    settings: &PipelineSettings,
    mode: ExecutionMode,
) -> Result<Report, PipelineError> {
    let mut ann = match annotations {
        Some(a) => a.clone(),
        None => AnnotationSet::whole(recording_id, recording.action_label(), recording.len()),
    };
    ann.validate(recording.len())?;
    let detected = settings
        .noise
        .map(|cfg| detect_noisy_frames(recording, &cfg))
        .unwrap_or_default();
    ann.merge_noisy(&detected);

    let actions = (0..ann.segments.len())
        .into_par_iter()
        .map(|i| match run_action(recording, &ann, i, settings, mode) {
            Ok(r) => ActionOutcome::Completed(Box::new(r)),
            Err(f) => ActionOutcome::Failed(f),
        })
        .collect();

    Ok(Report {
        recording_id: recording_id.to_string(),
        mode,
        total_frames: recording.len(),
        detected_noisy: detected,
        removed_noisy: ann.noisy_frames,
        actions,
    })
}
