//! Trajectory reproduction: a per-joint PID loop driven to each setpoint column.
//!
//! For every frame `t` and joint `j` the loop measures the joint, computes
//! the error to the setpoint, issues a PID position command and re-measures,
//! until the post-command error is below `epsilon` or the iteration budget
//! runs out. At least one command is issued per setpoint.

use serde::{Deserialize, Serialize};

use super::metrics::ErrorStats;
use super::pid::{pid_step, ControllerConfig, IntegralMode, Servicing};
use super::plant::JointPlant;
use super::ControlError;
use crate::limits::Side;
use crate::skeleton::{AngleJointId, AngleTrajectory, JointAngles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ExecutionMode {
    /// Feedback from simulated joint plants.
    #[default]
    #[serde(rename = "closed")]
    ClosedLoop,
    /// The controller's own outputs stand in for measurements.
    #[serde(rename = "open")]
    OpenLoop,
}

impl ExecutionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecutionMode::ClosedLoop => "closed",
            ExecutionMode::OpenLoop => "open",
        }
    }
}

impl std::str::FromStr for ExecutionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" | "closed_loop" => Ok(ExecutionMode::ClosedLoop),
            "open" | "open_loop" => Ok(ExecutionMode::OpenLoop),
            other => Err(format!("unknown execution mode {other:?}, expected closed|open")),
        }
    }
}

/// What happened to one joint while tracking one setpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointStep {
    pub setpoint: f64,
    pub achieved: f64,
    pub iterations: usize,
    /// Last commanded angle.
    pub output: f64,
    pub timed_out: bool,
    /// Largest |integral| seen during this setpoint.
    pub peak_integral: f64,
    /// Largest single-iteration movement of the joint.
    pub max_movement: f64,
}

impl JointStep {
    pub fn error(&self) -> f64 {
        self.setpoint - self.achieved
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub index: usize,
    pub time: f64,
    /// Control ticks spent on this column (iterations in wall-clock order).
    pub ticks: usize,
    pub joints: [JointStep; 7],
    pub stats: ErrorStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionTrace {
    action_label: String,
    mode: ExecutionMode,
    dt: f64,
    steps: Vec<TraceStep>,
}

impl ExecutionTrace {
    pub fn action_label(&self) -> &str {
        &self.action_label
    }

    pub fn mode(&self) -> ExecutionMode {
        self.mode
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn achieved(&self) -> Vec<JointAngles> {
        self.steps
            .iter()
            .map(|s| JointAngles(s.joints.map(|j| j.achieved)))
            .collect()
    }

    pub fn timeouts(&self) -> usize {
        self.steps
            .iter()
            .flat_map(|s| s.joints.iter())
            .filter(|j| j.timed_out)
            .count()
    }
}

trait Feedback {
    fn measure(&mut self, joint: usize) -> f64;
    /// Commands a joint for one control step; returns the movement.
    fn command(&mut self, joint: usize, target: f64, dt: f64) -> f64;
}

struct PlantFeedback<'a>(&'a mut [JointPlant; 7]);

impl Feedback for PlantFeedback<'_> {
    fn measure(&mut self, joint: usize) -> f64 {
        self.0[joint].measure()
    }

    fn command(&mut self, joint: usize, target: f64, dt: f64) -> f64 {
        self.0[joint].command(target, dt)
    }
}

struct OpenLoopFeedback([f64; 7]);

impl Feedback for OpenLoopFeedback {
    fn measure(&mut self, joint: usize) -> f64 {
        self.0[joint]
    }

    fn command(&mut self, joint: usize, target: f64, _dt: f64) -> f64 {
        let moved = target - self.0[joint];
        self.0[joint] = target;
        moved
    }
}

struct JointLoop {
    joint: usize,
    setpoint: f64,
    measured: f64,
    error: f64,
    prev_error: f64,
    integral: f64,
    iterations: usize,
    output: f64,
    done: bool,
    timed_out: bool,
    peak_integral: f64,
    max_movement: f64,
}

impl JointLoop {
    fn start(joint: usize, setpoint: f64, integral: f64, fb: &mut impl Feedback) -> Self {
        let measured = fb.measure(joint);
        let error = setpoint - measured;
        Self {
            joint,
            setpoint,
            measured,
            error,
            // no derivative kick on the first iteration
            prev_error: error,
            integral,
            iterations: 0,
            output: measured,
            done: false,
            timed_out: false,
            peak_integral: integral.abs(),
            max_movement: 0.0,
        }
    }

    fn iterate(&mut self, fb: &mut impl Feedback, cfg: &ControllerConfig) {
        self.iterations += 1;
        let pid = pid_step(self.error, self.prev_error, self.integral, cfg, self.measured);
        self.integral = pid.integral;
        self.peak_integral = self.peak_integral.max(pid.integral.abs());
        self.output = pid.output;
        let moved = fb.command(self.joint, pid.output, cfg.dt);
        self.max_movement = self.max_movement.max(moved.abs());

        self.measured = fb.measure(self.joint);
        self.prev_error = self.error;
        self.error = self.setpoint - self.measured;
        if self.error.abs() < cfg.epsilon {
            self.done = true;
        } else if self.iterations >= cfg.max_iters_per_setpoint {
            self.done = true;
            self.timed_out = true;
        }
    }

    fn step(&self) -> JointStep {
        JointStep {
            setpoint: self.setpoint,
            achieved: self.measured,
            iterations: self.iterations,
            output: self.output,
            timed_out: self.timed_out,
            peak_integral: self.peak_integral,
            max_movement: self.max_movement,
        }
    }
}

fn track(
    traj: &AngleTrajectory,
    fb: &mut impl Feedback,
    cfg: &ControllerConfig,
    mode: ExecutionMode,
) -> ExecutionTrace {
    let mut carried = [0.0; 7];
    let mut steps = Vec::with_capacity(traj.len());
    for (index, (column, &time)) in traj.columns().iter().zip(traj.frame_times()).enumerate() {
        let mut loops: Vec<JointLoop> = AngleJointId::ALL
            .iter()
            .map(|j| {
                let integral = match cfg.integral_mode {
                    IntegralMode::PerSetpoint => 0.0,
                    IntegralMode::Carry => carried[j.index()],
                };
                JointLoop::start(j.index(), column[*j], integral, fb)
            })
            .collect();

        let ticks = match cfg.servicing {
            Servicing::Sequential => {
                for l in loops.iter_mut() {
                    while !l.done {
                        l.iterate(fb, cfg);
                    }
                }
                loops.iter().map(|l| l.iterations).sum()
            }
            Servicing::Interleaved => {
                let mut ticks = 0;
                while loops.iter().any(|l| !l.done) {
                    ticks += 1;
                    for l in loops.iter_mut().filter(|l| !l.done) {
                        l.iterate(fb, cfg);
                    }
                }
                ticks
            }
        };

        for l in &loops {
            carried[l.joint] = l.integral;
        }
        let joints: [JointStep; 7] = std::array::from_fn(|j| loops[j].step());
        let errors = joints.map(|j| j.error());
        steps.push(TraceStep {
            index,
            time,
            ticks,
            joints,
            stats: ErrorStats::from_errors(&errors),
        });
    }
    ExecutionTrace {
        action_label: traj.action_label().to_string(),
        mode,
        dt: cfg.dt,
        steps,
    }
}

fn require_robot_side(traj: &AngleTrajectory) -> Result<(), ControlError> {
    if traj.side() != Side::Robot {
        return Err(ControlError::WrongSide);
    }
    Ok(())
}

/// Executes a robot-side trajectory against simulated joint plants.
pub fn reproduce_motion(
    traj: &AngleTrajectory,
    plants: &mut [JointPlant; 7],
    cfg: &ControllerConfig,
) -> Result<ExecutionTrace, ControlError> {
    require_robot_side(traj)?;
    cfg.validate()?;
    for (frame, column) in traj.columns().iter().enumerate() {
        for (joint, value) in column.iter() {
            let limits = plants[joint.index()].limits();
            if !limits.contains(value) {
                return Err(ControlError::SetpointOutOfRange {
                    frame,
                    joint,
                    value,
                    lower: limits.lower,
                    upper: limits.upper,
                });
            }
        }
    }
    Ok(track(
        traj,
        &mut PlantFeedback(plants),
        cfg,
        ExecutionMode::ClosedLoop,
    ))
}

/// Tracks a trajectory without a plant: each control output is taken as the
/// next measurement, starting from `start`.
pub fn open_loop_track(
    traj: &AngleTrajectory,
    start: &JointAngles,
    cfg: &ControllerConfig,
) -> Result<ExecutionTrace, ControlError> {
    require_robot_side(traj)?;
    cfg.validate()?;
    Ok(track(
        traj,
        &mut OpenLoopFeedback(start.0),
        cfg,
        ExecutionMode::OpenLoop,
    ))
}
