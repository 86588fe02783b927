use serde::{Deserialize, Serialize};

use super::ControlError;

/// Whether the integral term restarts at each new setpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralMode {
    #[default]
    PerSetpoint,
    Carry,
}

/// Order in which joints are driven toward a setpoint column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Servicing {
    /// One iteration per unconverged joint per control tick.
    #[default]
    Interleaved,
    /// Each joint runs its own loop to completion before the next starts.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Per-joint error tolerance, degrees.
    pub epsilon: f64,
    /// Control step, seconds.
    pub dt: f64,
    pub max_iters_per_setpoint: usize,
    /// Anti-windup bound on the integral, degree-seconds.
    pub integral_limit: f64,
    pub integral_mode: IntegralMode,
    pub servicing: Servicing,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kp: 0.8,
            ki: 0.05,
            kd: 0.01,
            epsilon: 0.5,
            dt: 0.033,
            max_iters_per_setpoint: 200,
            integral_limit: 50.0,
            integral_mode: IntegralMode::PerSetpoint,
            servicing: Servicing::Interleaved,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |what: &str| Err(ControlError::InvalidConfig(what.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.max_iters_per_setpoint < 1 {
            return bad("max_iters_per_setpoint must be at least 1");
        }
        if ![self.kp, self.ki, self.kd].iter().all(|g| g.is_finite()) {
            return bad("gains must be finite");
        }
        if !(self.integral_limit.is_finite() && self.integral_limit > 0.0) {
            return bad("integral_limit must be positive");
        }
        Ok(())
    }

    /// Proportional-only controller with the remaining fields at defaults.
    pub fn proportional(kp: f64) -> Self {
        Self {
            kp,
            ki: 0.0,
            kd: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    /// Commanded joint angle, degrees.
    pub output: f64,
    pub integral: f64,
}

/// One discrete PID update. The output is a position command: the measured
/// angle plus the PID correction.
pub fn pid_step(
    error: f64,
    prev_error: f64,
    integral: f64,
    cfg: &ControllerConfig,
    measured: f64,
) -> PidOutput {
    let e_dot = (error - prev_error) / cfg.dt;
    let integral = (integral + error * cfg.dt).clamp(-cfg.integral_limit, cfg.integral_limit);
    PidOutput {
        output: measured + cfg.kp * error + cfg.ki * integral + cfg.kd * e_dot,
        integral,
    }
}
