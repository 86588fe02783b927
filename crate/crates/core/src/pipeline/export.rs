//! Report export and the angle CSV format.
//!
//! `export_report` writes into the output directory:
//!
//! * `summary.json`: run metadata and one entry per action (failed actions
//!   included), always written.
//! * `NN_<label>_angles.csv`: human and robot angles per frame
//!   (`side,frame,time,RE,RSR,RSP,HP,LSR,LSP,LE`).
//! * `NN_<label>_trace.csv`: one row per (frame, joint) followed by an `ALL`
//!   summary row per frame (`t,time,joint,setpoint,achieved,error,iterations,
//!   output,timed_out,peak_integral,max_movement,e_abs,e_std`). In the `ALL`
//!   row `setpoint`/`achieved` are means over joints, `error` is the signed
//!   average error, `iterations` the control ticks and `timed_out` the number
//!   of timed-out joints.
//! * `NN_<label>_errors.csv`: plot series `t,time,e_signed,e_abs,e_std,
//!   band_lower,band_upper` with the band at signed error ± std.
//!
//! `NN` is the zero-padded segment index. Numbers use the shortest
//! round-trip decimal form, so repeated exports are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::{ActionFailure, ActionOutcome, ActionReport, Report};
use super::PipelineError;
use crate::angles::DroppedFrame;
use crate::control::TraceSummary;
use crate::limits::Side;
use crate::skeleton::{AngleJointId, AngleTrajectory, JointAngles};

pub const SUMMARY_FILE: &str = "summary.json";

fn sanitize(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "action".into()
    } else {
        s
    }
}

/// File names used for one action's exports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionFiles {
    pub angles: String,
    pub trace: String,
    pub errors: String,
}

impl ActionFiles {
    pub fn for_action(segment: usize, label: &str) -> Self {
        let stem = format!("{segment:02}_{}", sanitize(label));
        Self {
            angles: format!("{stem}_angles.csv"),
            trace: format!("{stem}_trace.csv"),
            errors: format!("{stem}_errors.csv"),
        }
    }
}

const ANGLE_HEADER: &str = "side,frame,time,RE,RSR,RSP,HP,LSR,LSP,LE";

fn push_angle_rows(out: &mut String, traj: &AngleTrajectory) {
    for (i, (time, column)) in traj.frame_times().iter().zip(traj.columns()).enumerate() {
        write!(out, "{},{i},{time}", traj.side().as_str()).unwrap();
        for v in column.0 {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
}

/// Angle CSV for one or more trajectories (typically human then robot).
pub fn angle_csv(trajectories: &[&AngleTrajectory]) -> String {
    let mut out = String::from(ANGLE_HEADER);
    out.push('\n');
    for traj in trajectories {
        push_angle_rows(&mut out, traj);
    }
    out
}

/// Parses the rows of `side` from an angle CSV.
pub fn parse_angle_csv(text: &str, side: Side, label: &str) -> Result<AngleTrajectory, PipelineError> {
    let csv_err = |line: usize, message: String| PipelineError::Csv { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == ANGLE_HEADER => {}
        _ => return Err(csv_err(1, format!("expected header {ANGLE_HEADER:?}"))),
    }
    let mut times = Vec::new();
    let mut columns = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(csv_err(n + 1, format!("expected 10 fields, found {}", fields.len())));
        }
        let row_side = match fields[0] {
            "human" => Side::Human,
            "robot" => Side::Robot,
            other => return Err(csv_err(n + 1, format!("unknown side {other:?}"))),
        };
        if row_side != side {
            continue;
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| csv_err(n + 1, format!("{s:?}: {e}")))
        };
        times.push(num(fields[2])?);
        let mut column = JointAngles::default();
        for (j, field) in AngleJointId::ALL.iter().zip(&fields[3..]) {
            column[*j] = num(field)?;
        }
        columns.push(column);
    }
    if columns.is_empty() {
        return Err(csv_err(0, format!("no {} rows", side.as_str())));
    }
    Ok(AngleTrajectory::new(side, label, times, columns)?)
}

pub fn read_angle_csv(path: &Path, side: Side) -> Result<AngleTrajectory, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let label = super::recording::recording_id(path);
    parse_angle_csv(&text, side, &label).map_err(|e| e.with_path(path))
}

/// Per-(frame, joint) trace rows plus a summary row per frame.
pub fn trace_csv(trace: &crate::control::ExecutionTrace) -> String {
    let mut out = String::from(
        "t,time,joint,setpoint,achieved,error,iterations,output,timed_out,peak_integral,max_movement,e_abs,e_std\n",
    );
    for step in trace.steps() {
        for (joint, j) in AngleJointId::ALL.iter().zip(step.joints.iter()) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},,",
                step.index,
                step.time,
                joint.code(),
                j.setpoint,
                j.achieved,
                j.error(),
                j.iterations,
                j.output,
                u8::from(j.timed_out),
                j.peak_integral,
                j.max_movement
            )
            .unwrap();
        }
        let mean = |f: fn(&crate::control::JointStep) -> f64| {
            step.joints.iter().map(f).sum::<f64>() / step.joints.len() as f64
        };
        writeln!(
            out,
            "{},{},ALL,{},{},{},{},,{},,,{},{}",
            step.index,
            step.time,
            mean(|j| j.setpoint),
            mean(|j| j.achieved),
            step.stats.signed,
            step.ticks,
            step.joints.iter().filter(|j| j.timed_out).count(),
            step.stats.abs,
            step.stats.std
        )
        .unwrap();
    }
    out
}

/// Plot-ready error series with a ±std band.
pub fn errors_csv(trace: &crate::control::ExecutionTrace) -> String {
    let mut out = String::from("t,time,e_signed,e_abs,e_std,band_lower,band_upper\n");
    for step in trace.steps() {
        let s = step.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            step.index,
            step.time,
            s.signed,
            s.abs,
            s.std,
            s.signed - s.std,
            s.signed + s.std
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum ActionEntry<'a> {
    Completed {
        segment: usize,
        action_label: &'a str,
        start_frame: usize,
        end_frame: usize,
        frames_executed: usize,
        noisy_removed: usize,
        degenerate_dropped: &'a [DroppedFrame],
        guard_adjusted: usize,
        guard_rejected: &'a [usize],
        files: ActionFiles,
        summary: &'a TraceSummary,
    },
    Failed(&'a ActionFailure),
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    recording_id: &'a str,
    mode: &'a str,
    total_frames: usize,
    detected_noisy: Vec<usize>,
    removed_noisy: Vec<usize>,
    actions: Vec<ActionEntry<'a>>,
}

fn entry(outcome: &ActionOutcome) -> ActionEntry<'_> {
    match outcome {
        ActionOutcome::Completed(r) => {
            let r: &ActionReport = r;
            ActionEntry::Completed {
                segment: r.segment,
                action_label: &r.action_label,
                start_frame: r.start_frame,
                end_frame: r.end_frame,
                frames_executed: r.trace.len(),
                noisy_removed: r.noisy_removed,
                degenerate_dropped: &r.degenerate_dropped,
                guard_adjusted: r.guard_adjusted,
                guard_rejected: &r.guard_rejected,
                files: ActionFiles::for_action(r.segment, &r.action_label),
                summary: &r.summary,
            }
        }
        ActionOutcome::Failed(f) => ActionEntry::Failed(f),
    }
}

/// Summary JSON for a report, as written to `summary.json`.
pub fn summary_json(report: &Report) -> String {
    let doc = SummaryDoc {
        recording_id: &report.recording_id,
        mode: report.mode.as_str(),
        total_frames: report.total_frames,
        detected_noisy: report.detected_noisy.iter().copied().collect(),
        removed_noisy: report.removed_noisy.iter().copied().collect(),
        actions: report.actions.iter().map(entry).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, PipelineError> {
    fs::write(&path, contents).map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}

/// Writes the report files into `out_dir` (created if needed) and returns
/// their paths, summary first.
pub fn export_report(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let mut written = vec![write(out_dir.join(SUMMARY_FILE), &summary_json(report))?];
    for r in report.completed() {
        let files = ActionFiles::for_action(r.segment, &r.action_label);
        written.push(write(out_dir.join(&files.angles), &angle_csv(&[&r.human, &r.robot]))?);
        written.push(write(out_dir.join(&files.trace), &trace_csv(&r.trace))?);
        written.push(write(out_dir.join(&files.errors), &errors_csv(&r.trace))?);
    }
    Ok(written)
}
