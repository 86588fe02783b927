use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ControlError;
use crate::limits::JointLimit;

pub const DEFAULT_RESPONSE_ALPHA: f64 = 0.6;
pub const DEFAULT_RATE_LIMIT: f64 = 90.0;

/// Simulated position-controlled joint: first-order lag toward the command,
/// rate limited, clamped to hard limits.
#[derive(Debug, Clone)]
pub struct JointPlant {
    angle: f64,
    rate_limit: f64,
    limits: JointLimit,
    response_alpha: f64,
    noise: Option<(Normal<f64>, ChaCha8Rng)>,
}

impl JointPlant {
    pub fn new(
        angle: f64,
        limits: JointLimit,
        rate_limit: f64,
        response_alpha: f64,
    ) -> Result<Self, ControlError> {
        if !(rate_limit.is_finite() && rate_limit > 0.0) {
            return Err(ControlError::InvalidPlant("rate_limit must be positive".into()));
        }
        if !(response_alpha > 0.0 && response_alpha <= 1.0) {
            return Err(ControlError::InvalidPlant("response_alpha must be in (0, 1]".into()));
        }
        if !limits.contains(angle) {
            return Err(ControlError::InvalidPlant(format!(
                "initial angle {angle} outside [{}, {}]",
                limits.min(),
                limits.max()
            )));
        }
        Ok(Self {
            angle,
            rate_limit,
            limits,
            response_alpha,
            noise: None,
        })
    }

    /// Gaussian measurement noise with a fixed seed. A zero std disables it.
    pub fn with_noise(mut self, std_dev: f64, seed: u64) -> Result<Self, ControlError> {
        if !(std_dev.is_finite() && std_dev >= 0.0) {
            return Err(ControlError::InvalidPlant("noise std must be non-negative".into()));
        }
        self.noise = if std_dev > 0.0 {
            let normal = Normal::new(0.0, std_dev)
                .map_err(|e| ControlError::InvalidPlant(e.to_string()))?;
            Some((normal, ChaCha8Rng::seed_from_u64(seed)))
        } else {
            None
        };
        Ok(self)
    }

    /// True joint angle, without measurement noise.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn limits(&self) -> JointLimit {
        self.limits
    }

    pub fn rate_limit(&self) -> f64 {
        self.rate_limit
    }

    pub fn measure(&mut self) -> f64 {
        match &mut self.noise {
            Some((normal, rng)) => self.angle + normal.sample(rng),
            None => self.angle,
        }
    }

    /// Advances one control step toward `command`; returns the signed movement.
    pub fn command(&mut self, command: f64, dt: f64) -> f64 {
        let max_step = self.rate_limit * dt;
        let step = (self.response_alpha * (command - self.angle)).clamp(-max_step, max_step);
        let next = self.limits.clamp(self.angle + step);
        let moved = next - self.angle;
        self.angle = next;
        moved
    }
}
