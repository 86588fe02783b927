//! Skeleton demonstrations and joint-angle trajectories.

use std::ops::{Index, IndexMut};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::Side;

/// The nine tracked upper-body joints. Indices are 1-based so link
/// subscripts read the same as the joint numbering (`l_{1,2}` is
/// right wrist to right elbow).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointId {
    RightWrist,
    RightElbow,
    RightShoulder,
    Collar,
    Neck,
    Head,
    LeftShoulder,
    LeftElbow,
    LeftWrist,
}

impl JointId {
    pub const ALL: [JointId; 9] = [
        JointId::RightWrist,
        JointId::RightElbow,
        JointId::RightShoulder,
        JointId::Collar,
        JointId::Neck,
        JointId::Head,
        JointId::LeftShoulder,
        JointId::LeftElbow,
        JointId::LeftWrist,
    ];

    /// 1-based joint number.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        index.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self {
            JointId::RightWrist => "right_wrist",
            JointId::RightElbow => "right_elbow",
            JointId::RightShoulder => "right_shoulder",
            JointId::Collar => "collar",
            JointId::Neck => "neck",
            JointId::Head => "head",
            JointId::LeftShoulder => "left_shoulder",
            JointId::LeftElbow => "left_elbow",
            JointId::LeftWrist => "left_wrist",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|j| j.name() == name)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// The seven derived joint angles, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AngleJointId {
    #[serde(rename = "RE")]
    RightElbow,
    #[serde(rename = "RSR")]
    RightShoulderRoll,
    #[serde(rename = "RSP")]
    RightShoulderPitch,
    #[serde(rename = "HP")]
    HeadPitch,
    #[serde(rename = "LSR")]
    LeftShoulderRoll,
    #[serde(rename = "LSP")]
    LeftShoulderPitch,
    #[serde(rename = "LE")]
    LeftElbow,
}

impl AngleJointId {
    pub const ALL: [AngleJointId; 7] = [
        AngleJointId::RightElbow,
        AngleJointId::RightShoulderRoll,
        AngleJointId::RightShoulderPitch,
        AngleJointId::HeadPitch,
        AngleJointId::LeftShoulderRoll,
        AngleJointId::LeftShoulderPitch,
        AngleJointId::LeftElbow,
    ];

    /// 0-based row in an angle matrix.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        match self {
            AngleJointId::RightElbow => "RE",
            AngleJointId::RightShoulderRoll => "RSR",
            AngleJointId::RightShoulderPitch => "RSP",
            AngleJointId::HeadPitch => "HP",
            AngleJointId::LeftShoulderRoll => "LSR",
            AngleJointId::LeftShoulderPitch => "LSP",
            AngleJointId::LeftElbow => "LE",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|j| j.code() == code)
    }
}

impl std::fmt::Display for AngleJointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkeletonError {
    #[error("non-finite coordinate for joint {}", .0.name())]
    NonFinite(JointId),
    #[error("non-finite timestamp")]
    NonFiniteTimestamp,
    #[error("sequence has no frames")]
    EmptySequence,
    #[error("timestamp of frame {frame} does not increase")]
    NonIncreasingTimestamp { frame: usize },
    #[error("degenerate link (norm {norm:e}){}", .angle.map(|a| format!(" while computing {a}")).unwrap_or_default())]
    DegenerateLink { angle: Option<AngleJointId>, norm: f64 },
    #[error("frame {frame} rejected: {source}")]
    RejectedFrame {
        frame: usize,
        #[source]
        source: Box<SkeletonError>,
    },
    #[error("all {dropped} frames were degenerate")]
    EmptyAfterFiltering { dropped: usize },
    #[error("trajectory shape mismatch: {0}")]
    Shape(String),
}

/// One timestamped set of joint positions, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    timestamp: f64,
    positions: [Vector3<f64>; 9],
}

impl SkeletonFrame {
    /// `positions` is ordered as [`JointId::ALL`].
    pub fn new(timestamp: f64, positions: [Vector3<f64>; 9]) -> Result<Self, SkeletonError> {
        if !timestamp.is_finite() {
            return Err(SkeletonError::NonFiniteTimestamp);
        }
        for (joint, p) in JointId::ALL.iter().zip(positions.iter()) {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(SkeletonError::NonFinite(*joint));
            }
        }
        Ok(Self {
            timestamp,
            positions,
        })
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn position(&self, joint: JointId) -> Vector3<f64> {
        self.positions[joint.slot()]
    }

    pub fn positions(&self) -> &[Vector3<f64>; 9] {
        &self.positions
    }

    pub fn with_timestamp(&self, timestamp: f64) -> Result<Self, SkeletonError> {
        Self::new(timestamp, self.positions)
    }

    /// Applies `f` to every joint position.
    pub fn map_positions<F>(&self, f: F) -> Result<Self, SkeletonError>
    where
        F: Fn(JointId, Vector3<f64>) -> Vector3<f64>,
    {
        let mut positions = self.positions;
        for joint in JointId::ALL {
            positions[joint.slot()] = f(joint, positions[joint.slot()]);
        }
        Self::new(self.timestamp, positions)
    }
}

/// A recorded demonstration of one action.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence {
    action_label: String,
    frames: Vec<SkeletonFrame>,
    sample_rate_hint: Option<f64>,
}

impl SkeletonSequence {
    pub fn new(
        action_label: impl Into<String>,
        frames: Vec<SkeletonFrame>,
        sample_rate_hint: Option<f64>,
    ) -> Result<Self, SkeletonError> {
        if frames.is_empty() {
            return Err(SkeletonError::EmptySequence);
        }
        if let Some(frame) = frames
            .windows(2)
            .position(|w| w[1].timestamp <= w[0].timestamp)
        {
            return Err(SkeletonError::NonIncreasingTimestamp { frame: frame + 1 });
        }
        Ok(Self {
            action_label: action_label.into(),
            frames,
            sample_rate_hint,
        })
    }

    pub fn action_label(&self) -> &str {
        &self.action_label
    }

    pub fn frames(&self) -> &[SkeletonFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn sample_rate_hint(&self) -> Option<f64> {
        self.sample_rate_hint
    }
}

/// Seven joint angles in degrees, indexed by [`AngleJointId`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAngles(pub [f64; 7]);

impl JointAngles {
    pub fn iter(&self) -> impl Iterator<Item = (AngleJointId, f64)> + '_ {
        AngleJointId::ALL.iter().map(move |j| (*j, self.0[j.index()]))
    }

    pub fn map<F: Fn(AngleJointId, f64) -> f64>(&self, f: F) -> Self {
        let mut out = self.0;
        for j in AngleJointId::ALL {
            out[j.index()] = f(j, out[j.index()]);
        }
        JointAngles(out)
    }
}

impl Index<AngleJointId> for JointAngles {
    type Output = f64;

    fn index(&self, joint: AngleJointId) -> &f64 {
        &self.0[joint.index()]
    }
}

impl IndexMut<AngleJointId> for JointAngles {
    fn index_mut(&mut self, joint: AngleJointId) -> &mut f64 {
        &mut self.0[joint.index()]
    }
}

/// A 7×T matrix of joint angles (degrees), stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTrajectory {
    side: Side,
    action_label: String,
    frame_times: Vec<f64>,
    columns: Vec<JointAngles>,
}

impl AngleTrajectory {
    pub fn new(
        side: Side,
        action_label: impl Into<String>,
        frame_times: Vec<f64>,
        columns: Vec<JointAngles>,
    ) -> Result<Self, SkeletonError> {
        if frame_times.len() != columns.len() {
            return Err(SkeletonError::Shape(format!(
                "{} frame times for {} columns",
                frame_times.len(),
                columns.len()
            )));
        }
        if columns.iter().any(|c| c.0.iter().any(|v| !v.is_finite())) {
            return Err(SkeletonError::Shape("non-finite angle".into()));
        }
        Ok(Self {
            side,
            action_label: action_label.into(),
            frame_times,
            columns,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn action_label(&self) -> &str {
        &self.action_label
    }

    pub fn frame_times(&self) -> &[f64] {
        &self.frame_times
    }

    pub fn columns(&self) -> &[JointAngles] {
        &self.columns
    }

    /// Number of frames (matrix columns).
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// One matrix row: the series of a single joint over time.
    pub fn joint_series(&self, joint: AngleJointId) -> Vec<f64> {
        self.columns.iter().map(|c| c[joint]).collect()
    }
}
