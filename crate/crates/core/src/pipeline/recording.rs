//! JSON Lines skeleton recordings.
//!
//! One frame per line:
//!
//! ```text
//! {"t": 0.033, "joints": {"right_wrist": [x, y, z], "right_elbow": [...], ...}}
//! ```
//!
//! All nine joint names must be present in every frame; any additional joints
//! a tracker exports are ignored. Blank lines are skipped. Timestamps are in
//! seconds and must strictly increase; they are shifted to start at zero on
//! load.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::skeleton::{JointId, SkeletonError, SkeletonFrame, SkeletonSequence};

#[derive(Debug, Deserialize, Serialize)]
struct RecordLine {
    t: f64,
    joints: BTreeMap<String, [f64; 3]>,
}

/// Recording id derived from a file name (`session.jsonl` → `session`).
pub fn recording_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "recording".to_string())
}

pub fn load_recording(path: &Path) -> Result<SkeletonSequence, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    read_recording(BufReader::new(file), &recording_id(path)).map_err(|e| e.with_path(path))
}

pub fn read_recording<R: BufRead>(reader: R, label: &str) -> Result<SkeletonSequence, PipelineError> {
    let mut frames: Vec<SkeletonFrame> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| PipelineError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RecordLine = serde_json::from_str(&line).map_err(|e| PipelineError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let frame_index = frames.len();
        let mut positions = [Vector3::zeros(); 9];
        for (slot, joint) in JointId::ALL.iter().enumerate() {
            let p = record
                .joints
                .get(joint.name())
                .ok_or(PipelineError::Schema {
                    frame: frame_index,
                    joint: joint.name(),
                })?;
            positions[slot] = Vector3::from(*p);
        }
        let frame = SkeletonFrame::new(record.t, positions).map_err(|e| PipelineError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(prev) = frames.last() {
            if frame.timestamp() <= prev.timestamp() {
                return Err(PipelineError::Order { frame: frame_index });
            }
        }
        frames.push(frame);
    }
    let Some(first) = frames.first().map(|f| f.timestamp()) else {
        return Err(PipelineError::Skeleton(SkeletonError::EmptySequence));
    };
    let frames = frames
        .iter()
        .map(|f| f.with_timestamp(f.timestamp() - first))
        .collect::<Result<Vec<_>, _>>()?;
    let hint = match frames.len() {
        0 | 1 => None,
        n => Some((n - 1) as f64 / frames[n - 1].timestamp()),
    };
    SkeletonSequence::new(label, frames, hint).map_err(|e| match e {
        SkeletonError::NonIncreasingTimestamp { frame } => PipelineError::Order { frame },
        other => PipelineError::Skeleton(other),
    })
}

pub fn write_recording<W: Write>(seq: &SkeletonSequence, mut out: W) -> std::io::Result<()> {
    for frame in seq.frames() {
        let joints = JointId::ALL
            .iter()
            .map(|j| {
                let p = frame.position(*j);
                (j.name().to_string(), [p.x, p.y, p.z])
            })
            .collect();
        let line = RecordLine {
            t: frame.timestamp(),
            joints,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_recording(seq: &SkeletonSequence, path: &Path) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    write_recording(seq, BufWriter::new(file)).map_err(|e| PipelineError::io(path, e))
}
