//! PID reproduction of robot-side trajectories and reproduction-error metrics.

mod execute;
mod metrics;
mod pid;
mod plant;

use thiserror::Error;

use crate::limits::JointLimitTable;
use crate::skeleton::{AngleJointId, JointAngles};

pub use execute::{
    open_loop_track, reproduce_motion, ExecutionMode, ExecutionTrace, JointStep, TraceStep,
};
pub use metrics::{
    average_abs_error, average_error, error_std, summarize, ErrorStats, TraceSummary,
};
pub use pid::{pid_step, ControllerConfig, IntegralMode, PidOutput, Servicing};
pub use plant::{JointPlant, DEFAULT_RATE_LIMIT, DEFAULT_RESPONSE_ALPHA};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid controller config: {0}")]
    InvalidConfig(String),
    #[error("invalid joint plant: {0}")]
    InvalidPlant(String),
    #[error("trajectory must be robot-side")]
    WrongSide,
    #[error("setpoint {value} for {joint} at frame {frame} outside plant limits [{lower}, {upper}]")]
    SetpointOutOfRange {
        frame: usize,
        joint: AngleJointId,
        value: f64,
        lower: f64,
        upper: f64,
    },
}

/// Builds seven plants at `initial`, one per joint of `limits`. Noise seeds
/// are derived from `seed` per joint.
pub fn plant_bank(
    initial: &JointAngles,
    limits: &JointLimitTable,
    rate_limit: f64,
    response_alpha: f64,
    noise_std: f64,
    seed: u64,
) -> Result<[JointPlant; 7], ControlError> {
    let mut plants = Vec::with_capacity(7);
    for joint in AngleJointId::ALL {
        let plant = JointPlant::new(
            initial[joint],
            limits.get(joint),
            rate_limit,
            response_alpha,
        )?
        .with_noise(noise_std, seed.wrapping_mul(7).wrapping_add(joint.index() as u64))?;
        plants.push(plant);
    }
    Ok(plants.try_into().expect("seven plants"))
}
