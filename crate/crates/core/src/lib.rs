//! Turns recorded human skeleton demonstrations into robot joint trajectories
//! and reproduces them on a simulated position-controlled robot.
//!
//! The flow is: skeleton frames → seven human joint angles
//! ([`angles`]) → robot joint ranges ([`retarget`]) → PID reproduction
//! ([`control`]) → reproduction-error metrics. [`pipeline`] wires the stages
//! together with recording I/O, noisy-frame detection and annotations.

pub mod angles;
pub mod control;
pub mod limits;
pub mod pipeline;
pub mod retarget;
pub mod robot;
pub mod skeleton;

pub use angles::{angle_between, extract_angles, extract_trajectory, link, ExtractionConfig};
pub use limits::{JointLimit, JointLimitTable, Side};
pub use retarget::{map_angle, map_trajectory};
pub use skeleton::{AngleJointId, AngleTrajectory, JointAngles, JointId, SkeletonFrame, SkeletonSequence};
