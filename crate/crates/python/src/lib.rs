//! Python bindings: attitude helpers, the simulation environment, the PD
//! baseline, the TD3 agent and the long fault scenario.

use std::path::PathBuf;

use nalgebra::Vector3;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rwctl_core::agent::train::{train, ActorPolicy, Policy};
use rwctl_core::agent::Td3Agent;
use rwctl_core::attitude::{self, AttitudeMRP, UnitQuaternion};
use rwctl_core::baseline::{pd_control, PdController, PdGains};
use rwctl_core::env::{self, Action, Observation, StepResult};
use rwctl_core::harness::run::{self, AgentKind};
use rwctl_core::harness::{checkpoint, metrics, RunConfig, TelemetryRecord};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn a3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn mrp(a: [f64; 3]) -> AttitudeMRP {
    AttitudeMRP::from_vector(v3(a))
}

fn obs_of(a: [f64; 6]) -> Observation {
    Observation {
        mrp_error: Vector3::new(a[0], a[1], a[2]),
        omega: Vector3::new(a[3], a[4], a[5]),
    }
}

fn load_config(config: Option<&str>) -> PyResult<RunConfig> {
    match config {
        Some(text) => RunConfig::from_toml_str(text).map_err(value_err),
        None => Ok(RunConfig::default()),
    }
}

/// MRP of a scalar-first unit quaternion.
#[pyfunction]
fn mrp_from_quat(q: [f64; 4]) -> PyResult<[f64; 3]> {
    let q = UnitQuaternion::new(q[0], Vector3::new(q[1], q[2], q[3]));
    attitude::mrp_from_quat(&q).map(|s| a3(&s.sigma)).map_err(value_err)
}

#[pyfunction]
fn quat_from_mrp(sigma: [f64; 3]) -> [f64; 4] {
    let q = attitude::quat_from_mrp(&mrp(sigma));
    [q.q0, q.qv.x, q.qv.y, q.qv.z]
}

#[pyfunction]
fn mrp_shadow(sigma: [f64; 3]) -> PyResult<[f64; 3]> {
    attitude::mrp_shadow(&mrp(sigma)).map(|s| a3(&s.sigma)).map_err(value_err)
}

/// Attitude of `target` seen from `current`.
#[pyfunction]
fn mrp_error(current: [f64; 3], target: [f64; 3]) -> [f64; 3] {
    a3(&attitude::mrp_error(&mrp(current), &mrp(target)).sigma)
}

/// Rotation angle in radians.
#[pyfunction]
fn principal_angle(sigma: [f64; 3]) -> f64 {
    attitude::principal_angle(&mrp(sigma))
}

#[pyfunction]
fn mrp_rate(sigma: [f64; 3], omega: [f64; 3]) -> [f64; 3] {
    a3(&attitude::mrp_rate(&mrp(sigma), &v3(omega)))
}

#[pyfunction]
fn reward_fn(e_prev: f64, e_curr: f64, omega_norm: f64) -> f64 {
    env::reward_fn(e_prev, e_curr, omega_norm)
}

/// Body torque of the PD law.
#[pyfunction]
#[pyo3(signature = (mrp_error, omega, kp = 0.02, kd = 0.2))]
fn pd_torque(mrp_error: [f64; 3], omega: [f64; 3], kp: f64, kd: f64) -> [f64; 3] {
    a3(&pd_control(&v3(mrp_error), &v3(omega), &PdGains { kp, kd }))
}

type StepTuple<'py> = (Vec<f64>, f64, bool, Bound<'py, PyDict>);

fn step_tuple(py: Python<'_>, r: StepResult) -> PyResult<StepTuple<'_>> {
    let info = PyDict::new_bound(py);
    info.set_item("t", r.detail.t)?;
    info.set_item("e_prev", r.info.e_prev)?;
    info.set_item("e_curr", r.info.e_curr)?;
    info.set_item("omega_norm", r.info.omega_norm)?;
    info.set_item("error_angle_deg", r.obs.error_angle().to_degrees())?;
    info.set_item("tau_cmd", r.detail.tau_cmd)?;
    info.set_item("tau_applied", r.detail.tau_applied)?;
    info.set_item("wheel_speeds", r.detail.wheel_speeds)?;
    info.set_item("fault_flags", r.detail.fault_flags)?;
    Ok((r.obs.to_array().to_vec(), r.reward, r.done, info))
}

/// Control environment. Observations are `[sigma_err (3), omega (3)]`,
/// actions are 4 wheel commands in [-1, 1].
#[pyclass(name = "Environment")]
struct PyEnvironment {
    inner: env::Environment,
    pd: PdController,
}

#[pymethods]
impl PyEnvironment {
    /// `config` is TOML text. `scenario=True` selects the long fault
    /// scenario instead of training episodes.
    #[new]
    #[pyo3(signature = (config = None, scenario = false))]
    fn new(config: Option<&str>, scenario: bool) -> PyResult<Self> {
        let cfg = load_config(config)?;
        let inner = if scenario {
            run::scenario_environment(&cfg)
        } else {
            run::training_environment(&cfg)
        }
        .map_err(value_err)?;
        let pd = PdController::new(cfg.pd, inner.model().wheels.beta).map_err(value_err)?;
        Ok(Self { inner, pd })
    }

    fn reset(&mut self, seed: u64) -> PyResult<Vec<f64>> {
        let (obs, _) = self.inner.reset(seed).map_err(runtime_err)?;
        Ok(obs.to_array().to_vec())
    }

    /// Returns `(obs, reward, done, info)`.
    fn step<'py>(&mut self, py: Python<'py>, action: [f64; 4]) -> PyResult<StepTuple<'py>> {
        let r = self.inner.step(&Action(action)).map_err(runtime_err)?;
        step_tuple(py, r)
    }

    /// One control interval flown by the PD baseline.
    fn step_pd<'py>(&mut self, py: Python<'py>) -> PyResult<StepTuple<'py>> {
        let r = self.pd.step(&mut self.inner).map_err(runtime_err)?;
        step_tuple(py, r)
    }

    fn observation(&self) -> Vec<f64> {
        self.inner.observation().to_array().to_vec()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn done(&self) -> bool {
        self.inner.is_done()
    }

    #[getter]
    fn attitude(&self) -> [f64; 3] {
        a3(&self.inner.state().attitude.sigma)
    }

    #[getter]
    fn omega(&self) -> [f64; 3] {
        a3(&self.inner.state().omega)
    }

    /// Redistribution weights over the wheels after the last step.
    #[getter]
    fn wheel_weights(&self) -> Option<Vec<f64>> {
        self.inner.redistribution().map(|r| r.weights.lambda.clone())
    }
}

/// TD3 agent with optional hindsight relabeling and dimension-wise clipping.
#[pyclass(name = "Agent")]
struct PyAgent {
    inner: Td3Agent,
    config: RunConfig,
    seed: u64,
}

#[pymethods]
impl PyAgent {
    #[new]
    #[pyo3(signature = (config = None, seed = 0, her = None, dwc = None))]
    fn new(config: Option<&str>, seed: u64, her: Option<bool>, dwc: Option<bool>) -> PyResult<Self> {
        let mut cfg = load_config(config)?;
        if let Some(h) = her {
            cfg.agent.her_enabled = h;
        }
        if let Some(d) = dwc {
            cfg.agent.dwc_enabled = d;
        }
        let inner = Td3Agent::new(cfg.agent.clone(), seed).map_err(value_err)?;
        Ok(Self { inner, config: cfg, seed })
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.config.variant()
    }

    #[getter]
    fn critic_updates(&self) -> u64 {
        self.inner.critic_updates()
    }

    #[getter]
    fn actor_updates(&self) -> u64 {
        self.inner.actor_updates()
    }

    #[pyo3(signature = (obs, explore = false))]
    fn act(&mut self, obs: [f64; 6], explore: bool) -> [f64; 4] {
        self.inner.select_action(&obs_of(obs), explore).0
    }

    /// Trains for `steps` environment steps (the config value when omitted)
    /// and returns the evaluation curve as
    /// `[(env_steps, mean_return, mean_error_deg), ...]`.
    #[pyo3(signature = (steps = None))]
    fn train(&mut self, py: Python<'_>, steps: Option<usize>) -> PyResult<Vec<(usize, f64, f64)>> {
        let mut tc = self.config.train.clone();
        if let Some(s) = steps {
            tc.total_steps = s;
        }
        let mut env = run::training_environment(&self.config).map_err(value_err)?;
        let seed = self.seed;
        let agent = &mut self.inner;
        let report = py
            .allow_threads(|| train(agent, &mut env, &tc, seed, |_, _| {}))
            .map_err(runtime_err)?;
        Ok(report
            .evals
            .iter()
            .map(|p| (p.env_steps, p.stats.mean_return, p.stats.mean_error_deg))
            .collect())
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        checkpoint::save(&path, &self.inner).map_err(runtime_err)
    }

    fn load(&mut self, path: PathBuf) -> PyResult<()> {
        checkpoint::load(&path, &mut self.inner).map_err(value_err)
    }

    /// Flies one scenario-environment step with the deterministic policy.
    fn step<'py>(&mut self, py: Python<'py>, env: &mut PyEnvironment) -> PyResult<StepTuple<'py>> {
        let r = ActorPolicy::new(&self.inner).step(&mut env.inner).map_err(runtime_err)?;
        step_tuple(py, r)
    }
}

fn telemetry_dict<'py>(py: Python<'py>, records: &[TelemetryRecord]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("t", records.iter().map(|r| r.t).collect::<Vec<_>>())?;
    d.set_item("error_angle_deg", records.iter().map(|r| r.error_angle_deg).collect::<Vec<_>>())?;
    d.set_item("omega", records.iter().map(|r| r.omega).collect::<Vec<_>>())?;
    d.set_item("tau_applied", records.iter().map(|r| r.tau_applied.clone()).collect::<Vec<_>>())?;
    d.set_item("wheel_speed", records.iter().map(|r| r.wheel_speed.clone()).collect::<Vec<_>>())?;
    Ok(d)
}

/// Flies the long fault scenario and returns `(telemetry, metrics)` as
/// dicts. Learning agents need `agent`.
#[pyfunction]
#[pyo3(signature = (kind = "pd", agent = None, config = None, seed = 0))]
fn run_scenario<'py>(
    py: Python<'py>,
    kind: &str,
    agent: Option<PyRef<'py, PyAgent>>,
    config: Option<&str>,
    seed: u64,
) -> PyResult<(Bound<'py, PyDict>, Bound<'py, PyDict>)> {
    let cfg = load_config(config)?;
    let kind = AgentKind::parse(kind).ok_or_else(|| PyValueError::new_err(format!("unknown agent kind {kind:?}")))?;
    let agent = agent.as_ref().map(|a| &a.inner);
    let records = py
        .allow_threads(|| run::scenario_rollout(&cfg, kind, agent, seed))
        .map_err(runtime_err)?;
    let m = metrics(&records, cfg.scenario.fault_time()).map_err(runtime_err)?;
    let md = PyDict::new_bound(py);
    md.set_item("mean_err_pre_deg", m.mean_err_pre_deg)?;
    md.set_item("mean_err_post_deg", m.mean_err_post_deg)?;
    md.set_item("settle_time_s", m.settle_time_s)?;
    md.set_item("rms_omega_post", m.rms_omega_post)?;
    md.set_item("torque_smoothness", m.torque_smoothness)?;
    Ok((telemetry_dict(py, &records)?, md))
}

#[pymodule]
fn rwctl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mrp_from_quat, m)?)?;
    m.add_function(wrap_pyfunction!(quat_from_mrp, m)?)?;
    m.add_function(wrap_pyfunction!(mrp_shadow, m)?)?;
    m.add_function(wrap_pyfunction!(mrp_error, m)?)?;
    m.add_function(wrap_pyfunction!(principal_angle, m)?)?;
    m.add_function(wrap_pyfunction!(mrp_rate, m)?)?;
    m.add_function(wrap_pyfunction!(reward_fn, m)?)?;
    m.add_function(wrap_pyfunction!(pd_torque, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_class::<PyEnvironment>()?;
    m.add_class::<PyAgent>()?;
    Ok(())
}
