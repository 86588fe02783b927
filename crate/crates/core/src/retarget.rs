//! Human-to-robot joint range conversion.

use thiserror::Error;

use crate::limits::{JointLimitTable, Side};
use crate::skeleton::{AngleJointId, AngleTrajectory, SkeletonError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetargetError {
    #[error("limit table mismatch for {joint}: {reason}")]
    LimitTableMismatch {
        joint: AngleJointId,
        reason: &'static str,
    },
    #[error("expected a {expected:?}-side trajectory")]
    WrongSide { expected: Side },
    #[error(transparent)]
    Shape(#[from] SkeletonError),
}

fn check_tables(
    joint: AngleJointId,
    human: &JointLimitTable,
    robot: &JointLimitTable,
) -> Result<(), RetargetError> {
    if human.side() != Side::Human {
        return Err(RetargetError::LimitTableMismatch {
            joint,
            reason: "source table is not a human table",
        });
    }
    if robot.side() != Side::Robot {
        return Err(RetargetError::LimitTableMismatch {
            joint,
            reason: "target table is not a robot table",
        });
    }
    Ok(())
}

/// Affine map of a human joint angle onto the robot's range for that joint.
///
/// The human lower/upper limits land exactly on the robot lower/upper
/// limits. An inverted robot range (`lower > upper`) gives a negative scale.
/// Inputs are expected to be clamped into the human range already; for such
/// inputs the result is also clamped into the robot range so rounding never
/// lands a hair outside it. Out-of-range inputs extrapolate.
pub fn map_angle(
    theta_human: f64,
    joint: AngleJointId,
    human: &JointLimitTable,
    robot: &JointLimitTable,
) -> Result<f64, RetargetError> {
    check_tables(joint, human, robot)?;
    let h = human.get(joint);
    let r = robot.get(joint);
    let mapped = r.lower + r.span() / h.span() * (theta_human - h.lower);
    Ok(if h.contains(theta_human) { r.clamp(mapped) } else { mapped })
}

/// Element-wise [`map_angle`] over a human trajectory.
pub fn map_trajectory(
    traj: &AngleTrajectory,
    human: &JointLimitTable,
    robot: &JointLimitTable,
) -> Result<AngleTrajectory, RetargetError> {
    if traj.side() != Side::Human {
        return Err(RetargetError::WrongSide {
            expected: Side::Human,
        });
    }
    let mut columns = Vec::with_capacity(traj.len());
    for column in traj.columns() {
        let mut mapped = *column;
        for joint in AngleJointId::ALL {
            mapped[joint] = map_angle(column[joint], joint, human, robot)?;
        }
        columns.push(mapped);
    }
    Ok(AngleTrajectory::new(
        Side::Robot,
        traj.action_label(),
        traj.frame_times().to_vec(),
        columns,
    )?)
}
