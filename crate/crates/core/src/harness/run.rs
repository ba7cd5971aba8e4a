//! Training, evaluation and comparison runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint;
use super::config::{config_hash, RunConfig};
use super::metrics::{metrics, Metrics};
use super::plot::telemetry_charts;
use super::telemetry::{write_csv, TelemetryRecord};
use crate::agent::train::{train, ActorPolicy, EvalPoint, Policy, TrainReport};
use crate::agent::{AgentConfig, Td3Agent};
use crate::baseline::PdController;
use crate::env::Environment;
use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Pd,
    Td3,
    Td3Hd,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Pd, AgentKind::Td3, AgentKind::Td3Hd];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Pd => "pd",
            AgentKind::Td3 => "td3",
            AgentKind::Td3Hd => "td3-hd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_learning(self) -> bool {
        self != AgentKind::Pd
    }
}

/// Agent section of `cfg` with the relabeling and clipping switches set
/// for `kind`.
pub fn agent_config(cfg: &RunConfig, kind: AgentKind) -> AgentConfig {
    let mut a = cfg.agent.clone();
    if kind == AgentKind::Td3 {
        a.her_enabled = false;
        a.dwc_enabled = false;
    }
    a
}

pub fn training_environment(cfg: &RunConfig) -> Result<Environment, HarnessError> {
    Ok(Environment::new(cfg.scenario.model()?, cfg.environment.clone())?)
}

pub fn scenario_environment(cfg: &RunConfig) -> Result<Environment, HarnessError> {
    Ok(Environment::new(cfg.scenario.model()?, cfg.scenario_episode())?)
}

/// Runs one full episode from `env.reset(seed)` and records every step.
pub fn rollout<P: Policy>(env: &mut Environment, policy: &mut P, seed: u64) -> Result<Vec<TelemetryRecord>, HarnessError> {
    env.reset(seed)?;
    let dt = env.config.control_dt;
    let mut out = Vec::with_capacity(env.config.n_steps);
    loop {
        let obs = env.observation();
        let t = env.steps() as f64 * dt;
        let r = policy.step(env)?;
        out.push(TelemetryRecord {
            t,
            sigma_err: [obs.mrp_error.x, obs.mrp_error.y, obs.mrp_error.z],
            omega: [obs.omega.x, obs.omega.y, obs.omega.z],
            error_angle_deg: obs.error_angle().to_degrees(),
            tau_cmd: r.detail.tau_cmd,
            tau_applied: r.detail.tau_applied,
            wheel_speed: r.detail.wheel_speeds,
            reward: r.reward,
            fault: r.detail.fault_flags,
        });
        if r.done {
            break;
        }
    }
    Ok(out)
}

/// Metadata written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub variant: String,
    pub seed: u64,
    pub config_hash: String,
    pub duration: f64,
    pub fault_time: Option<f64>,
    pub initial_sigma: [f64; 3],
    pub initial_omega: [f64; 3],
    pub metrics: Metrics,
}

pub struct RunOutcome {
    pub meta: RunMeta,
    pub telemetry: Vec<TelemetryRecord>,
}

pub fn scenario_rollout(cfg: &RunConfig, kind: AgentKind, agent: Option<&Td3Agent>, seed: u64) -> Result<Vec<TelemetryRecord>, HarnessError> {
    let mut env = scenario_environment(cfg)?;
    match (kind, agent) {
        (AgentKind::Pd, _) => {
            let mut pd = PdController::new(cfg.pd, cfg.scenario.wheels.beta)?;
            rollout(&mut env, &mut pd, seed)
        }
        (_, Some(agent)) => rollout(&mut env, &mut ActorPolicy::new(agent), seed),
        (_, None) => Err(HarnessError::Config(format!("agent {} needs trained weights", kind.name()))),
    }
}

fn outcome(cfg: &RunConfig, command: &str, kind: AgentKind, seed: u64, telemetry: Vec<TelemetryRecord>) -> Result<RunOutcome, HarnessError> {
    let fault_time = cfg.scenario.fault_time();
    let m = metrics(&telemetry, fault_time)?;
    let mut env = scenario_environment(cfg)?;
    env.reset(seed)?;
    let s = env.state();
    Ok(RunOutcome {
        meta: RunMeta {
            command: command.into(),
            variant: if kind.is_learning() {
                agent_config(cfg, kind).variant().to_string()
            } else {
                "pd".into()
            },
            seed,
            config_hash: hex(&config_hash(&agent_config(cfg, kind))),
            duration: cfg.scenario.duration,
            fault_time,
            initial_sigma: [s.attitude.sigma.x, s.attitude.sigma.y, s.attitude.sigma.z],
            initial_omega: [s.omega.x, s.omega.y, s.omega.z],
            metrics: m,
        },
        telemetry,
    })
}

/// Writes `telemetry.csv` and `run.toml` into `dir`.
pub fn write_outcome(dir: &Path, o: &RunOutcome) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_csv(fs::File::create(dir.join("telemetry.csv"))?, &o.telemetry)?;
    fs::write(dir.join("run.toml"), toml::to_string(&o.meta).map_err(|e| HarnessError::Telemetry(e.to_string()))?)?;
    Ok(())
}

pub struct TrainOutcome {
    pub agent: Td3Agent,
    pub report: TrainReport,
    pub run: RunOutcome,
}

/// Trains a learning agent, then flies the long scenario with its
/// deterministic policy.
pub fn train_run<F>(cfg: &RunConfig, kind: AgentKind, seed: u64, on_eval: F) -> Result<TrainOutcome, HarnessError>
where
    F: FnMut(&EvalPoint, &Td3Agent),
{
    if !kind.is_learning() {
        return Err(HarnessError::Config("the pd controller has nothing to train".into()));
    }
    let mut agent = Td3Agent::new(agent_config(cfg, kind), seed)?;
    let mut env = training_environment(cfg)?;
    let report = train(&mut agent, &mut env, &cfg.train, seed, on_eval)?;
    let telemetry = scenario_rollout(cfg, kind, Some(&agent), seed)?;
    let run = outcome(cfg, "train", kind, seed, telemetry)?;
    Ok(TrainOutcome { agent, report, run })
}

pub fn write_train_outputs(dir: &Path, t: &TrainOutcome) -> Result<(), HarnessError> {
    write_outcome(dir, &t.run)?;
    checkpoint::save(&dir.join("checkpoint.bin"), &t.agent)?;
    let mut w = csv::Writer::from_path(dir.join("learning_curve.csv"))?;
    w.write_record(["env_steps", "mean_return", "mean_error_deg", "mean_final_error_deg"])?;
    for p in &t.report.evals {
        w.write_record([
            p.env_steps.to_string(),
            p.stats.mean_return.to_string(),
            p.stats.mean_error_deg.to_string(),
            p.stats.mean_final_error_deg.to_string(),
        ])?;
    }
    w.flush()?;
    fs::write(
        dir.join("train_report.toml"),
        toml::to_string(&t.report).map_err(|e| HarnessError::Telemetry(e.to_string()))?,
    )?;
    Ok(())
}

/// Scenario run of a PD controller or a checkpointed agent.
pub fn eval_run(cfg: &RunConfig, kind: AgentKind, seed: u64, checkpoint_path: Option<&Path>) -> Result<RunOutcome, HarnessError> {
    let agent = match (kind.is_learning(), checkpoint_path) {
        (false, _) => None,
        (true, Some(p)) => {
            let mut a = Td3Agent::new(agent_config(cfg, kind), seed)?;
            checkpoint::load(p, &mut a)?;
            Some(a)
        }
        (true, None) => {
            return Err(HarnessError::Config(format!("eval --agent {} requires --checkpoint", kind.name())));
        }
    };
    let telemetry = scenario_rollout(cfg, kind, agent.as_ref(), seed)?;
    outcome(cfg, "eval", kind, seed, telemetry)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub agent: String,
    pub seed: u64,
    pub metrics: Metrics,
}

/// Every agent on every seed; learning agents are trained first.
pub fn compare(cfg: &RunConfig, out: &Path, mut log: impl FnMut(&str)) -> Result<Vec<CompareRow>, HarnessError> {
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        for kind in AgentKind::ALL {
            let dir = out.join(format!("{}-seed{seed}", kind.name()));
            let run = if kind.is_learning() {
                log(&format!("training {} seed {seed}", kind.name()));
                let t = train_run(cfg, kind, seed, |_, _| {})?;
                write_train_outputs(&dir, &t)?;
                t.run
            } else {
                let o = eval_run(cfg, kind, seed, None)?;
                write_outcome(&dir, &o)?;
                o
            };
            log(&format!("{} seed {seed}: {:?}", kind.name(), run.meta.metrics));
            rows.push(CompareRow {
                agent: kind.name().into(),
                seed,
                metrics: run.meta.metrics,
            });
        }
    }
    write_compare_csv(&out.join("compare.csv"), &rows)?;
    Ok(rows)
}

pub fn write_compare_csv(path: &Path, rows: &[CompareRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "agent",
        "seed",
        "mean_err_pre_deg",
        "mean_err_post_deg",
        "settle_time_s",
        "rms_omega_post",
        "torque_smoothness",
    ])?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.agent.clone(),
            r.seed.to_string(),
            m.mean_err_pre_deg.to_string(),
            m.mean_err_post_deg.to_string(),
            m.settle_time_s.map_or_else(|| "never".into(), |t| t.to_string()),
            m.rms_omega_post.to_string(),
            m.torque_smoothness.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Renders the charts of a telemetry CSV next to it.
pub fn plot_file(csv_path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let records = super::telemetry::read_csv(fs::File::open(csv_path)?)?;
    let dir = csv_path.parent().unwrap_or(Path::new("."));
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("telemetry");
    let label = dir.file_name().and_then(|s| s.to_str()).unwrap_or(stem);
    let mut written = Vec::new();
    for (name, svg) in telemetry_charts(&records, label) {
        let p = dir.join(format!("{stem}_{name}"));
        fs::write(&p, svg)?;
        written.push(p);
    }
    Ok(written)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
