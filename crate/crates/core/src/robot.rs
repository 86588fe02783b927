//! Robot arm model, wrist forward kinematics and a box-volume self-collision guard.
//!
//! # Kinematic convention
//!
//! The base frame sits between the shoulders at shoulder height: `x` points
//! forward, `y` to the robot's left, `z` up. Shoulders are at
//! `(0, ±shoulder_offset, 0)`. With every joint at zero both arms hang
//! straight down (`-z`).
//!
//! Robot joint values are converted to three geometric angles per arm:
//!
//! * swing: forward rotation of the upper arm in the xz-plane. Left arm uses
//!   `LSP`, right arm uses `-RSP` (the two pitch ranges mirror each other).
//! * abduction: `-SR`, lifting the upper arm sideways away from the body.
//! * flexion: `-E`, bending the forearm toward the body midline.
//!
//! `upper_dir = Ry(-swing) * Rx(s * abduction) * (0,0,-1)` and
//! `fore_dir = Ry(-swing) * Rx(s * abduction) * Rx(-s * flexion) * (0,0,-1)`
//! with `s = +1` for the left arm and `-1` for the right.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::{JointLimitTable, Side};
use crate::skeleton::{AngleJointId, JointAngles};

/// Elbow search resolution, degrees.
pub const GUARD_RESOLUTION_DEG: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobotError {
    #[error("invalid robot model: {0}")]
    InvalidModel(String),
    #[error("no {arm:?} elbow angle within limits clears the body volume")]
    Unresolvable { arm: Arm },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    fn sign(self) -> f64 {
        match self {
            Arm::Left => 1.0,
            Arm::Right => -1.0,
        }
    }

    fn elbow(self) -> AngleJointId {
        match self {
            Arm::Left => AngleJointId::LeftElbow,
            Arm::Right => AngleJointId::RightElbow,
        }
    }
}

/// Axis-aligned box approximating head and torso.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyBox {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
}

impl BodyBox {
    fn offset(&self, p: &Vector3<f64>) -> Vector3<f64> {
        p - Vector3::from(self.center)
    }

    /// True when `p` lies strictly inside the box.
    pub fn strictly_contains(&self, p: &Vector3<f64>) -> bool {
        let d = self.offset(p);
        (0..3).all(|i| d[i].abs() < self.half_extents[i])
    }

    /// Closest point on the box surface to an interior point.
    pub fn nearest_surface_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let d = self.offset(p);
        let (axis, _) = (0..3)
            .map(|i| (i, self.half_extents[i] - d[i].abs()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let mut out = *p;
        let sign = if d[axis] < 0.0 { -1.0 } else { 1.0 };
        out[axis] = self.center[axis] + sign * self.half_extents[axis];
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub limits: JointLimitTable,
    pub upper_arm: f64,
    pub forearm: f64,
    pub shoulder_offset: f64,
    pub body: BodyBox,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        limits: JointLimitTable,
        upper_arm: f64,
        forearm: f64,
        shoulder_offset: f64,
        body: BodyBox,
    ) -> Result<Self, RobotError> {
        if limits.side() != Side::Robot {
            return Err(RobotError::InvalidModel("limits must be a robot table".into()));
        }
        let lengths = [upper_arm, forearm, shoulder_offset];
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(RobotError::InvalidModel("link lengths must be positive".into()));
        }
        if body.half_extents.iter().any(|h| !(h.is_finite() && *h > 0.0))
            || body.center.iter().any(|c| !c.is_finite())
        {
            return Err(RobotError::InvalidModel("body half-extents must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            limits,
            upper_arm,
            forearm,
            shoulder_offset,
            body,
        })
    }

    /// QTrobot joint limits with approximate arm dimensions.
    pub fn qtrobot() -> Self {
        Self::new(
            "QTrobot",
            JointLimitTable::qtrobot_default(),
            0.10,
            0.11,
            0.11,
            BodyBox {
                center: [0.0, 0.0, -0.025],
                half_extents: [0.07, 0.085, 0.225],
            },
        )
        .expect("default model is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPose {
    pub shoulder: Vector3<f64>,
    pub elbow: Vector3<f64>,
    pub wrist: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristPositions {
    pub left: Vector3<f64>,
    pub right: Vector3<f64>,
}

impl WristPositions {
    pub fn get(&self, arm: Arm) -> Vector3<f64> {
        match arm {
            Arm::Left => self.left,
            Arm::Right => self.right,
        }
    }
}

/// Shoulder, elbow and wrist positions of one arm.
pub fn arm_pose(theta: &JointAngles, model: &RobotModel, arm: Arm) -> ArmPose {
    use AngleJointId::*;
    let s = arm.sign();
    let (swing, abduction, flexion) = match arm {
        Arm::Left => (
            theta[LeftShoulderPitch],
            -theta[LeftShoulderRoll],
            -theta[LeftElbow],
        ),
        Arm::Right => (
            -theta[RightShoulderPitch],
            -theta[RightShoulderRoll],
            -theta[RightElbow],
        ),
    };
    let down = -Vector3::z();
    let shoulder_rot = Rotation3::from_axis_angle(&Vector3::y_axis(), -swing.to_radians())
        * Rotation3::from_axis_angle(&Vector3::x_axis(), s * abduction.to_radians());
    let elbow_rot = Rotation3::from_axis_angle(&Vector3::x_axis(), -s * flexion.to_radians());

    let shoulder = Vector3::new(0.0, s * model.shoulder_offset, 0.0);
    let elbow = shoulder + model.upper_arm * (shoulder_rot * down);
    let wrist = elbow + model.forearm * (shoulder_rot * elbow_rot * down);
    ArmPose {
        shoulder,
        elbow,
        wrist,
    }
}

/// Wrist positions for a robot joint configuration (degrees).
pub fn forward_kinematics(theta: &JointAngles, model: &RobotModel) -> WristPositions {
    WristPositions {
        left: arm_pose(theta, model, Arm::Left).wrist,
        right: arm_pose(theta, model, Arm::Right).wrist,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardContact {
    pub arm: Arm,
    pub wrist: Vector3<f64>,
    pub surface_point: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardResult {
    pub safe: JointAngles,
    pub adjusted: bool,
    pub contacts: Vec<GuardContact>,
}

fn wrist_clear(theta: &JointAngles, model: &RobotModel, arm: Arm) -> bool {
    !model
        .body
        .strictly_contains(&arm_pose(theta, model, arm).wrist)
}

fn with_elbow(theta: &JointAngles, arm: Arm, value: f64) -> JointAngles {
    let mut out = *theta;
    out[arm.elbow()] = value;
    out
}

fn resolve_elbow(theta: &JointAngles, model: &RobotModel, arm: Arm) -> Result<f64, RobotError> {
    let limit = model.limits.get(arm.elbow());
    let start = theta[arm.elbow()];
    let clear = |v: f64| wrist_clear(&with_elbow(theta, arm, v), model, arm);

    // Pick the clear candidate closest to the current elbow angle: the
    // range endpoints first, then a grid scan for non-monotone cases.
    let mut target = [limit.min(), limit.max()]
        .into_iter()
        .filter(|v| clear(*v))
        .min_by(|a, b| (a - start).abs().total_cmp(&(b - start).abs()));
    if target.is_none() {
        let steps = ((limit.max() - limit.min()) / GUARD_RESOLUTION_DEG).ceil() as usize;
        target = (0..=steps)
            .map(|i| (limit.min() + i as f64 * GUARD_RESOLUTION_DEG).min(limit.max()))
            .filter(|v| clear(*v))
            .min_by(|a, b| (a - start).abs().total_cmp(&(b - start).abs()));
    }
    let mut outside = target.ok_or(RobotError::Unresolvable { arm })?;

    let mut inside = start;
    while (outside - inside).abs() > GUARD_RESOLUTION_DEG {
        let mid = 0.5 * (inside + outside);
        if clear(mid) {
            outside = mid;
        } else {
            inside = mid;
        }
    }
    Ok(outside)
}

/// Keeps both wrists outside the body box by re-solving the offending elbow.
///
/// Other joints are held fixed. The returned configuration never places a
/// wrist strictly inside the box.
pub fn self_collision_guard(
    theta: &JointAngles,
    model: &RobotModel,
) -> Result<GuardResult, RobotError> {
    let mut safe = *theta;
    let mut contacts = Vec::new();
    for arm in [Arm::Right, Arm::Left] {
        let wrist = arm_pose(&safe, model, arm).wrist;
        if !model.body.strictly_contains(&wrist) {
            continue;
        }
        contacts.push(GuardContact {
            arm,
            wrist,
            surface_point: model.body.nearest_surface_point(&wrist),
        });
        safe[arm.elbow()] = resolve_elbow(&safe, model, arm)?;
    }
    Ok(GuardResult {
        safe,
        adjusted: !contacts.is_empty(),
        contacts,
    })
}
