//! Per-joint angle limit tables for the human skeleton and the robot.
//!
//! Robot tables may list `lower > upper`: several actuators count in the
//! opposite sense to the human joint they mirror, and the range map keeps
//! that orientation instead of normalizing it away.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton::AngleJointId;

/// Which embodiment an angle table or trajectory belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Human,
    Robot,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Human => "human",
            Side::Robot => "robot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("limit table mismatch for joint {joint}: {reason}")]
    Mismatch { joint: String, reason: String },
    #[error("invalid {side:?} range for {joint}: lower {lower}, upper {upper}")]
    InvalidRange {
        side: Side,
        joint: AngleJointId,
        lower: f64,
        upper: f64,
    },
}

/// Lower/upper bound pair in degrees, as printed in a limit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub lower: f64,
    pub upper: f64,
}

impl JointLimit {
    pub const fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn min(&self) -> f64 {
        self.lower.min(self.upper)
    }

    pub fn max(&self) -> f64 {
        self.lower.max(self.upper)
    }

    /// Signed span `upper - lower`; negative for inverted ranges.
    pub fn span(&self) -> f64 {
        self.upper - self.lower
    }

    /// Inclusive containment, independent of orientation.
    pub fn contains(&self, value: f64) -> bool {
        value >= self.min() && value <= self.max()
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min(), self.max())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Limits for the seven retargeted joints of one embodiment.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLimitTable {
    side: Side,
    limits: [JointLimit; 7],
}

impl JointLimitTable {
    pub fn new(side: Side, limits: [JointLimit; 7]) -> Result<Self, LimitError> {
        for (joint, limit) in AngleJointId::ALL.iter().zip(limits.iter()) {
            let finite = limit.lower.is_finite() && limit.upper.is_finite();
            let ordered = match side {
                Side::Human => limit.lower < limit.upper,
                Side::Robot => limit.lower != limit.upper,
            };
            if !finite || !ordered {
                return Err(LimitError::InvalidRange {
                    side,
                    joint: *joint,
                    lower: limit.lower,
                    upper: limit.upper,
                });
            }
        }
        Ok(Self { side, limits })
    }

    /// Human range-of-motion limits shipped as the default human table.
    pub fn human_default() -> Self {
        use AngleJointId::*;
        let mut limits = [JointLimit::new(0.0, 0.0); 7];
        for (joint, limit) in [
            (RightElbow, JointLimit::new(4.3, 142.6)),
            (RightShoulderRoll, JointLimit::new(0.0, 179.7)),
            (RightShoulderPitch, JointLimit::new(-66.5, 176.4)),
            (HeadPitch, JointLimit::new(-70.0, 85.0)),
            (LeftShoulderRoll, JointLimit::new(0.0, 179.7)),
            (LeftShoulderPitch, JointLimit::new(-66.5, 176.4)),
            (LeftElbow, JointLimit::new(4.3, 142.6)),
        ] {
            limits[joint.index()] = limit;
        }
        Self::new(Side::Human, limits).expect("shipped human table is valid")
    }

    /// QTrobot actuator limits, shipped as the default robot table.
    pub fn qtrobot_default() -> Self {
        use AngleJointId::*;
        let mut limits = [JointLimit::new(0.0, 0.0); 7];
        for (joint, limit) in [
            (RightElbow, JointLimit::new(-8.3, -77.2)),
            (RightShoulderRoll, JointLimit::new(-20.0, -80.0)),
            (RightShoulderPitch, JointLimit::new(140.0, -140.0)),
            (HeadPitch, JointLimit::new(-15.3, 21.1)),
            (LeftShoulderRoll, JointLimit::new(-21.1, -81.1)),
            (LeftShoulderPitch, JointLimit::new(-140.0, 140.0)),
            (LeftElbow, JointLimit::new(-8.0, -80.0)),
        ] {
            limits[joint.index()] = limit;
        }
        Self::new(Side::Robot, limits).expect("shipped robot table is valid")
    }

    /// Builds a table from a map keyed by joint code (`"RE"`, `"RSR"`, ...).
    /// Every joint must be present; unknown keys are rejected.
    pub fn from_map(side: Side, map: &BTreeMap<String, JointLimit>) -> Result<Self, LimitError> {
        for key in map.keys() {
            if AngleJointId::from_code(key).is_none() {
                return Err(LimitError::Mismatch {
                    joint: key.clone(),
                    reason: "unknown joint code".into(),
                });
            }
        }
        let mut limits = [JointLimit::new(0.0, 0.0); 7];
        for joint in AngleJointId::ALL {
            limits[joint.index()] = *map.get(joint.code()).ok_or_else(|| LimitError::Mismatch {
                joint: joint.code().into(),
                reason: format!("missing from {} table", side.as_str()),
            })?;
        }
        Self::new(side, limits)
    }

    pub fn to_map(&self) -> BTreeMap<String, JointLimit> {
        AngleJointId::ALL
            .iter()
            .map(|j| (j.code().to_string(), self.get(*j)))
            .collect()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn get(&self, joint: AngleJointId) -> JointLimit {
        self.limits[joint.index()]
    }

    pub fn limits(&self) -> &[JointLimit; 7] {
        &self.limits
    }

    /// The same bounds relabelled for the other side.
    pub fn with_side(&self, side: Side) -> Result<Self, LimitError> {
        Self::new(side, self.limits)
    }
}
