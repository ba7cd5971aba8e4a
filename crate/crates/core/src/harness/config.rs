//! Run configuration loaded from TOML.

use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::train::TrainConfig;
use crate::agent::AgentConfig;
use crate::baseline::PdGains;
use crate::dynamics::{FaultSchedule, InertiaMatrix, SpacecraftModel, WheelParams, DEFAULT_OMEGA_CAP};
use crate::env::EpisodeConfig;
use crate::error::HarnessError;

/// The long evaluation run: one spacecraft, one initial condition per seed,
/// a fixed fault schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Seconds.
    pub duration: f64,
    pub fault_schedule: FaultSchedule,
    /// Body inertia, kg·m², row-major.
    pub inertia: [[f64; 3]; 3],
    pub wheels: WheelParams,
    pub wheel_coupling: bool,
    /// Body-rate magnitude treated as divergence, rad/s.
    pub omega_cap: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let j = InertiaMatrix::default();
        let m = j.matrix();
        Self {
            duration: 8000.0,
            fault_schedule: FaultSchedule::single(0, 3000.0),
            inertia: [
                [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
            ],
            wheels: WheelParams::default(),
            wheel_coupling: true,
            omega_cap: DEFAULT_OMEGA_CAP,
        }
    }
}

impl ScenarioConfig {
    pub fn model(&self) -> Result<SpacecraftModel, HarnessError> {
        let j = Matrix3::from_fn(|r, c| self.inertia[r][c]);
        Ok(SpacecraftModel {
            inertia: InertiaMatrix::new(j)?,
            wheels: self.wheels.clone(),
            wheel_coupling: self.wheel_coupling,
            omega_cap: self.omega_cap,
        })
    }

    /// First scheduled fault, if any.
    pub fn fault_time(&self) -> Option<f64> {
        self.fault_schedule
            .entries()
            .iter()
            .map(|e| e.time)
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub scenario: ScenarioConfig,
    /// Training episodes.
    pub environment: EpisodeConfig,
    pub agent: AgentConfig,
    pub train: TrainConfig,
    pub pd: PdGains,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut environment = EpisodeConfig::default();
        environment.random_fault.probability = 0.5;
        Self {
            seeds: vec![0, 1, 2],
            output_dir: PathBuf::from("runs"),
            scenario: ScenarioConfig::default(),
            environment,
            agent: AgentConfig::default(),
            train: TrainConfig::default(),
            pd: PdGains::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate_anchored(Some(text))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.validate_anchored(None)
    }

    fn validate_anchored(&self, text: Option<&str>) -> Result<(), HarnessError> {
        let fail = |section: &str, msg: String| {
            let at = text
                .and_then(|t| section_line(t, section))
                .map(|l| format!("line {l}, [{section}]: "))
                .unwrap_or_else(|| format!("[{section}]: "));
            HarnessError::Config(format!("{at}{msg}"))
        };
        if self.seeds.is_empty() {
            return Err(fail("seeds", "at least one seed is required".into()));
        }
        let model = self.scenario.model().map_err(|e| fail("scenario", e.to_string()))?;
        if !(self.scenario.duration > 0.0 && self.scenario.duration.is_finite()) {
            return Err(fail("scenario", "duration must be positive".into()));
        }
        let n = model.wheels.wheel_count();
        self.scenario
            .fault_schedule
            .validate(n)
            .map_err(|e| fail("scenario", e.to_string()))?;
        self.environment.validate().map_err(|e| fail("environment", e.to_string()))?;
        self.environment
            .fault_schedule
            .validate(n)
            .map_err(|e| fail("environment", e.to_string()))?;
        if let Some(w) = self.environment.random_fault.wheels.iter().find(|&&w| w >= n) {
            return Err(fail("environment", format!("random_fault wheel {w} out of range")));
        }
        self.agent.validate().map_err(|e| fail("agent", e.to_string()))?;
        if self.train.eval_episodes == 0 {
            return Err(fail("train", "eval_episodes must be positive".into()));
        }
        self.train
            .eval_fault_schedule
            .validate(n)
            .map_err(|e| fail("train", e.to_string()))?;
        if !(self.pd.kp >= 0.0 && self.pd.kd >= 0.0) {
            return Err(fail("pd", "gains must be non-negative".into()));
        }
        Ok(())
    }

    /// Episodes of the long scenario for a given training environment.
    pub fn scenario_episode(&self) -> EpisodeConfig {
        let mut e = self.environment.clone();
        e.n_steps = (self.scenario.duration / e.control_dt).round().max(1.0) as usize;
        e.fault_schedule = self.scenario.fault_schedule.clone();
        e.random_fault.probability = 0.0;
        e
    }
}

/// SHA-256 of everything that fixes the network layout and learner.
pub fn config_hash(agent: &AgentConfig) -> [u8; 32] {
    let text = toml::to_string(agent).expect("agent config is always serializable");
    Sha256::digest(text.as_bytes()).into()
}

/// 1-based line of a `[section]` header or a top-level `section =` key.
fn section_line(text: &str, section: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim();
        l == format!("[{section}]")
            || l.starts_with(&format!("[{section}."))
            || (l.starts_with(section) && l[section.len()..].trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}
