//! TOML pipeline configuration. Every section is optional; an empty file
//! gives the shipped defaults (human and QTrobot limit tables, default gains).
//!
//! ```toml
//! [robot]
//! name = "QTrobot"
//! upper_arm = 0.10
//! forearm = 0.11
//! shoulder_offset = 0.11
//! body = { center = [0.0, 0.0, -0.025], half_extents = [0.07, 0.085, 0.225] }
//!
//! [limits.robot]
//! HP = { lower = -15.3, upper = 21.1 }
//! # ... all seven joints when the table is given
//!
//! [controller]
//! kp = 0.8
//! ki = 0.05
//! kd = 0.01
//! epsilon = 0.5
//! dt = 0.033
//! servicing = "interleaved"      # or "sequential"
//! integral_mode = "per_setpoint" # or "carry"
//!
//! [plant]
//! response_alpha = 0.6
//! rate_limit = 90.0
//! measurement_noise_std = 0.0
//! initial_pose = { RE = -40.0 }  # missing joints start mid-range
//! start_at_first_setpoint = false
//!
//! [noise]
//! enabled = true
//! jump_threshold = 0.5
//!
//! [extraction]
//! epsilon = 1e-9
//! policy = "drop"                # or "reject"
//!
//! [execution]
//! seed = 0
//! self_collision_guard = false
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::noise::NoiseDetectorConfig;
use super::PipelineError;
use crate::angles::{DegeneratePolicy, ExtractionConfig, DEFAULT_LINK_EPSILON};
use crate::control::{ControllerConfig, DEFAULT_RATE_LIMIT, DEFAULT_RESPONSE_ALPHA};
use crate::limits::{JointLimit, JointLimitTable, Side};
use crate::robot::{BodyBox, RobotModel};
use crate::skeleton::{AngleJointId, JointAngles};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotSection {
    pub name: String,
    pub upper_arm: f64,
    pub forearm: f64,
    pub shoulder_offset: f64,
    pub body: BodyBox,
}

impl Default for RobotSection {
    fn default() -> Self {
        let m = RobotModel::qtrobot();
        Self {
            name: m.name,
            upper_arm: m.upper_arm,
            forearm: m.forearm,
            shoulder_offset: m.shoulder_offset,
            body: m.body,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    pub human: Option<BTreeMap<String, JointLimit>>,
    pub robot: Option<BTreeMap<String, JointLimit>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub response_alpha: f64,
    pub rate_limit: f64,
    pub measurement_noise_std: f64,
    /// Starting robot pose by joint code; unlisted joints start mid-range.
    pub initial_pose: BTreeMap<String, f64>,
    /// Start each action with the robot already at its first setpoint,
    /// ignoring `initial_pose`.
    pub start_at_first_setpoint: bool,
}

impl Default for PlantSection {
    fn default() -> Self {
        Self {
            response_alpha: DEFAULT_RESPONSE_ALPHA,
            rate_limit: DEFAULT_RATE_LIMIT,
            measurement_noise_std: 0.0,
            initial_pose: BTreeMap::new(),
            start_at_first_setpoint: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub enabled: bool,
    #[serde(flatten)]
    pub detector: NoiseDetectorConfig,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            enabled: true,
            detector: NoiseDetectorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionSection {
    pub epsilon: f64,
    pub policy: DegeneratePolicy,
}

impl Default for ExtractionSection {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_LINK_EPSILON,
            policy: DegeneratePolicy::Drop,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionSection {
    pub seed: u64,
    pub self_collision_guard: bool,
}

/// The configuration file as written.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub robot: RobotSection,
    pub limits: LimitsSection,
    pub controller: ControllerConfig,
    pub plant: PlantSection,
    pub noise: NoiseSection,
    pub extraction: ExtractionSection,
    pub execution: ExecutionSection,
}

/// Validated settings ready for a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub model: RobotModel,
    pub extraction: ExtractionConfig,
    pub controller: ControllerConfig,
    pub initial_pose: JointAngles,
    pub start_at_first_setpoint: bool,
    pub response_alpha: f64,
    pub rate_limit: f64,
    pub measurement_noise_std: f64,
    pub noise: Option<NoiseDetectorConfig>,
    pub seed: u64,
    pub self_collision_guard: bool,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| e.with_path(path))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self) -> Result<PipelineSettings, PipelineError> {
        let human = match &self.limits.human {
            Some(map) => JointLimitTable::from_map(Side::Human, map)?,
            None => JointLimitTable::human_default(),
        };
        let robot = match &self.limits.robot {
            Some(map) => JointLimitTable::from_map(Side::Robot, map)?,
            None => JointLimitTable::qtrobot_default(),
        };
        let model = RobotModel::new(
            self.robot.name.clone(),
            robot,
            self.robot.upper_arm,
            self.robot.forearm,
            self.robot.shoulder_offset,
            self.robot.body,
        )
        .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.controller.validate()?;
        if !(self.extraction.epsilon.is_finite() && self.extraction.epsilon > 0.0) {
            return Err(PipelineError::Config("extraction epsilon must be positive".into()));
        }
        if self.noise.enabled {
            self.noise.detector.validate().map_err(PipelineError::Config)?;
        }

        let mut initial_pose = JointAngles(model.limits.limits().map(|l| l.midpoint()));
        for (code, value) in &self.plant.initial_pose {
            let joint = AngleJointId::from_code(code)
                .ok_or_else(|| PipelineError::Config(format!("unknown joint {code:?} in initial_pose")))?;
            if !model.limits.get(joint).contains(*value) {
                return Err(PipelineError::Config(format!(
                    "initial_pose {code} = {value} outside robot limits"
                )));
            }
            initial_pose[joint] = *value;
        }

        Ok(PipelineSettings {
            extraction: ExtractionConfig {
                epsilon: self.extraction.epsilon,
                policy: self.extraction.policy,
                human_limits: human,
            },
            model,
            controller: self.controller,
            initial_pose,
            start_at_first_setpoint: self.plant.start_at_first_setpoint,
            response_alpha: self.plant.response_alpha,
            rate_limit: self.plant.rate_limit,
            measurement_noise_std: self.plant.measurement_noise_std,
            noise: self.noise.enabled.then_some(self.noise.detector),
            seed: self.execution.seed,
            self_collision_guard: self.execution.self_collision_guard,
        })
    }
}

impl PipelineSettings {
    pub fn human_limits(&self) -> &JointLimitTable {
        &self.extraction.human_limits
    }

    pub fn robot_limits(&self) -> &JointLimitTable {
        &self.model.limits
    }
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineConfig::default().resolve().expect("default config is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Servicing;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = PipelineConfig::from_toml_str("").unwrap();
        let s = cfg.resolve().unwrap();
        assert_eq!(s.robot_limits(), &JointLimitTable::qtrobot_default());
        assert_eq!(s.human_limits(), &JointLimitTable::human_default());
        assert_eq!(s.controller, ControllerConfig::default());
        assert!(s.noise.is_some());
        assert!(!s.self_collision_guard);
        assert_eq!(s.initial_pose[AngleJointId::HeadPitch], 2.9000000000000004);
    }

    #[test]
    fn partial_overrides() {
        let text = r#"
            [controller]
            kp = 1.0
            servicing = "sequential"
            [plant]
            initial_pose = { RE = -40.0 }
            [noise]
            jump_threshold = 0.3
            [execution]
            self_collision_guard = true
        "#;
        let s = PipelineConfig::from_toml_str(text).unwrap().resolve().unwrap();
        assert_eq!(s.controller.kp, 1.0);
        assert_eq!(s.controller.ki, 0.05);
        assert_eq!(s.controller.servicing, Servicing::Sequential);
        assert_eq!(s.initial_pose[AngleJointId::RightElbow], -40.0);
        assert_eq!(s.noise.unwrap().jump_threshold, 0.3);
        assert!(s.self_collision_guard);
    }

    #[test]
    fn incomplete_limit_table_is_a_mismatch() {
        let text = "[limits.robot]\nHP = { lower = -15.3, upper = 21.1 }\n";
        let err = PipelineConfig::from_toml_str(text).unwrap().resolve().unwrap_err();
        assert!(matches!(err, PipelineError::Limit(_)), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "[controller]\ndt = 0.0\n",
            "[plant]\ninitial_pose = { RE = 10.0 }\n",
            "[plant]\ninitial_pose = { XX = 1.0 }\n",
            "[robot]\nforearm = -1.0\n",
            "[noise]\njump_threshold = -1.0\n",
        ] {
            let cfg = PipelineConfig::from_toml_str(text).unwrap();
            assert!(cfg.resolve().is_err(), "{text}");
        }
        assert!(PipelineConfig::from_toml_str("[bogus]\n").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = PipelineConfig::default();
        let back = PipelineConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
