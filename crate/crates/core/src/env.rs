//! Goal-conditioned episodic environment over the spacecraft dynamics.
//!
//! Observations are the attitude error relative to the goal together with
//! the body rate; actions are four normalized wheel-torque channels.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::redistribution::{AllocatorMode, BackupPolicy, Redistribution, Redistributor};
use crate::attitude::{mrp_error, principal_angle, AttitudeMRP, UnitQuaternion};
use crate::dynamics::{FaultEvent, FaultSchedule, Simulator, SpacecraftModel, SpacecraftState, N_PRIMARY};
use crate::error::{AgentError, EnvError};

pub const OBS_DIM: usize = 6;
pub const ACTION_DIM: usize = N_PRIMARY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub mrp_error: Vector3<f64>,
    pub omega: Vector3<f64>,
}

impl Observation {
    pub fn new(attitude: &AttitudeMRP, goal: &Goal, omega: &Vector3<f64>) -> Self {
        Self {
            mrp_error: mrp_error(attitude, &goal.sigma_target).sigma,
            omega: *omega,
        }
    }

    pub fn to_array(&self) -> [f64; OBS_DIM] {
        [
            self.mrp_error.x,
            self.mrp_error.y,
            self.mrp_error.z,
            self.omega.x,
            self.omega.y,
            self.omega.z,
        ]
    }

    pub fn error_norm(&self) -> f64 {
        self.mrp_error.norm()
    }

    pub fn error_angle(&self) -> f64 {
        principal_angle(&AttitudeMRP::from_vector(self.mrp_error))
    }
}

/// Normalized action, one component per wheel channel in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action(pub [f64; ACTION_DIM]);

impl Action {
    pub fn zero() -> Self {
        Action([0.0; ACTION_DIM])
    }

    pub fn clamped(&self) -> Self {
        Action(self.0.map(|a| if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Goal {
    pub sigma_target: AttitudeMRP,
}

impl Goal {
    pub fn new(sigma_target: AttitudeMRP) -> Self {
        Self {
            sigma_target: sigma_target.canonical(),
        }
    }
}

/// Quantities kept with each transition so its reward can be recomputed
/// for a different goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionInfo {
    pub sigma_abs: AttitudeMRP,
    pub sigma_abs_next: AttitudeMRP,
    pub e_prev: f64,
    pub e_curr: f64,
    pub omega_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Observation,
    pub action: Action,
    pub reward: f64,
    pub next_obs: Observation,
    /// Last step of the episode.
    pub done: bool,
    /// Episode ended in a true terminal state (never set by the fixed-length
    /// episodes; time-limit ends keep bootstrapping).
    pub terminal: bool,
    pub info: Option<TransitionInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// Error-norm threshold of the accuracy term.
    pub accuracy_threshold: f64,
    pub accuracy_bonus: f64,
    /// Body-rate norm above which the rate penalty applies, rad/s.
    pub omega_limit: f64,
    pub omega_penalty: f64,
    /// Drop the error-reduction term, leaving only the rate and accuracy terms.
    pub sparse: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            accuracy_threshold: 0.25,
            accuracy_bonus: 0.01,
            omega_limit: 1.0,
            omega_penalty: 10.0,
            sparse: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    pub error_reduction: f64,
    pub rate_penalty: f64,
    pub accuracy: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        self.error_reduction + self.rate_penalty + self.accuracy
    }
}

impl RewardConfig {
    pub fn terms(&self, e_prev: f64, e_curr: f64, omega_norm: f64) -> RewardTerms {
        RewardTerms {
            error_reduction: if self.sparse { 0.0 } else { e_prev - e_curr },
            rate_penalty: if omega_norm > self.omega_limit {
                -self.omega_penalty
            } else {
                0.0
            },
            accuracy: if e_curr < self.accuracy_threshold {
                self.accuracy_bonus
            } else {
                -self.accuracy_bonus
            },
        }
    }

    pub fn evaluate(&self, e_prev: f64, e_curr: f64, omega_norm: f64) -> f64 {
        self.terms(e_prev, e_curr, omega_norm).total()
    }
}

/// Reward with the default constants: error reduction, rate penalty and
/// accuracy incentive.
pub fn reward_fn(e_prev: f64, e_curr: f64, omega_norm: f64) -> f64 {
    RewardConfig::default().evaluate(e_prev, e_curr, omega_norm)
}

/// Reward a stored transition would have earned under `new_goal`.
pub fn relabel_reward(t: &Transition, new_goal: &Goal, reward: &RewardConfig) -> Result<f64, AgentError> {
    let info = t.info.as_ref().ok_or(AgentError::MissingInfo)?;
    let e_prev = mrp_error(&info.sigma_abs, &new_goal.sigma_target).norm();
    let e_curr = mrp_error(&info.sigma_abs_next, &new_goal.sigma_target).norm();
    Ok(reward.evaluate(e_prev, e_curr, info.omega_norm))
}

/// Attitude the agent actually reached, usable as a substitute goal.
pub fn achieved_goal(state: &SpacecraftState) -> AttitudeMRP {
    state.attitude
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomFaultConfig {
    /// Probability that a training episode contains a wheel failure.
    pub probability: f64,
    /// Candidate wheels; one is drawn uniformly.
    pub wheels: Vec<usize>,
}

impl Default for RandomFaultConfig {
    fn default() -> Self {
        Self {
            probability: 0.0,
            wheels: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    pub n_steps: usize,
    /// Seconds per control step.
    pub control_dt: f64,
    /// RK4 steps per control step.
    pub substeps: usize,
    pub initial_angle_max_deg: f64,
    /// Bound on each initial body-rate component, rad/s.
    pub initial_omega_max: f64,
    /// Draw the goal attitude at random instead of using the inertial target.
    pub random_goal: bool,
    pub goal_angle_max_deg: f64,
    /// Fault times are measured from the start of each episode.
    pub fault_schedule: FaultSchedule,
    pub random_fault: RandomFaultConfig,
    pub reward: RewardConfig,
    pub allocator: AllocatorMode,
    pub backup_policy: BackupPolicy,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            n_steps: 100,
            control_dt: 1.0,
            substeps: 10,
            initial_angle_max_deg: 120.0,
            initial_omega_max: 0.05,
            random_goal: false,
            goal_angle_max_deg: 180.0,
            fault_schedule: FaultSchedule::none(),
            random_fault: RandomFaultConfig::default(),
            reward: RewardConfig::default(),
            allocator: AllocatorMode::default(),
            backup_policy: BackupPolicy::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn internal_dt(&self) -> f64 {
        self.control_dt / self.substeps as f64
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: &str| Err(EnvError::InvalidConfig(m.to_string()));
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1");
        }
        if !(self.control_dt > 0.0 && self.control_dt.is_finite()) {
            return bad("control_dt must be positive");
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1");
        }
        if !(0.0..=180.0).contains(&self.initial_angle_max_deg) {
            return bad("initial_angle_max_deg must lie in [0, 180]");
        }
        if !(0.0..=180.0).contains(&self.goal_angle_max_deg) {
            return bad("goal_angle_max_deg must lie in [0, 180]");
        }
        if !(self.initial_omega_max >= 0.0) {
            return bad("initial_omega_max must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.random_fault.probability) {
            return bad("random_fault.probability must lie in [0, 1]");
        }
        if self.random_fault.probability > 0.0 && self.random_fault.wheels.is_empty() {
            return bad("random_fault.wheels is empty");
        }
        Ok(())
    }
}

/// Uniformly distributed rotation (Haar measure) restricted to principal
/// angles `<= max_angle`.
pub fn sample_attitude<R: Rng>(rng: &mut R, max_angle: f64) -> AttitudeMRP {
    if max_angle <= 0.0 {
        return AttitudeMRP::zero();
    }
    let max_angle = max_angle.min(std::f64::consts::PI);
    // angle density ∝ sin²(θ/2) on [0, π]
    let cap = (0.5 * max_angle).sin().powi(2);
    let angle = loop {
        let theta = rng.gen::<f64>() * max_angle;
        if rng.gen::<f64>() * cap <= (0.5 * theta).sin().powi(2) {
            break theta;
        }
    };
    let axis = loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        let n = v.norm();
        if n > 1e-6 && n <= 1.0 {
            break v / n;
        }
    };
    AttitudeMRP::from_axis_angle(&axis, angle)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDetail {
    pub t: f64,
    /// Wheel commands after allocation, averaged over the substeps.
    pub tau_cmd: Vec<f64>,
    pub tau_applied: Vec<f64>,
    pub wheel_speeds: Vec<f64>,
    pub fault_flags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: TransitionInfo,
    pub detail: StepDetail,
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub config: EpisodeConfig,
    sim: Simulator,
    base_model: SpacecraftModel,
    allocator: Redistributor,
    goal: Goal,
    steps: usize,
    e_prev: f64,
    done: bool,
}

impl Environment {
    pub fn new(model: SpacecraftModel, config: EpisodeConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let sim = Simulator::new(model.clone(), config.fault_schedule.clone())?;
        let allocator = Redistributor::new(config.allocator, config.backup_policy);
        Ok(Self {
            config,
            sim,
            base_model: model,
            allocator,
            goal: Goal::default(),
            steps: 0,
            e_prev: 0.0,
            done: true,
        })
    }

    pub fn model(&self) -> &SpacecraftModel {
        &self.base_model
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn state(&self) -> &SpacecraftState {
        &self.sim.state
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    /// Wheel weights and routing used by the latest `step`.
    pub fn redistribution(&self) -> Option<&Redistribution> {
        self.allocator.last()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn observation(&self) -> Observation {
        Observation::new(&self.sim.state.attitude, &self.goal, &self.sim.state.omega)
    }

    /// Starts a new episode; identical seeds give identical episodes.
    pub fn reset(&mut self, seed: u64) -> Result<(Observation, Goal), EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let attitude = sample_attitude(&mut rng, self.config.initial_angle_max_deg.to_radians());
        let w = self.config.initial_omega_max;
        let mut omega = Vector3::zeros();
        for c in omega.iter_mut() {
            *c = if w > 0.0 { rng.gen_range(-w..=w) } else { 0.0 };
        }
        let goal = if self.config.random_goal {
            Goal::new(sample_attitude(&mut rng, self.config.goal_angle_max_deg.to_radians()))
        } else {
            Goal::default()
        };
        let mut schedule = self.config.fault_schedule.clone();
        let rf = &self.config.random_fault;
        if rf.probability > 0.0 && rng.gen::<f64>() < rf.probability {
            let wheel = rf.wheels[rng.gen_range(0..rf.wheels.len())];
            let horizon = self.config.n_steps as f64 * self.config.control_dt;
            // fault at a control-step boundary
            let k = rng.gen_range(0..self.config.n_steps) as f64;
            let time = (k * self.config.control_dt).min(horizon);
            if !schedule.entries().iter().any(|e| e.wheel == wheel) {
                let mut entries = schedule.entries().to_vec();
                entries.push(FaultEvent { wheel, time });
                schedule = FaultSchedule::new(entries)?;
            }
        }
        self.reset_to(attitude, omega, goal, schedule)
    }

    /// Starts an episode from an explicit initial condition.
    pub fn reset_to(
        &mut self,
        attitude: AttitudeMRP,
        omega: Vector3<f64>,
        goal: Goal,
        schedule: FaultSchedule,
    ) -> Result<(Observation, Goal), EnvError> {
        let mut sim = Simulator::new(self.base_model.clone(), schedule)?;
        sim.state.attitude = attitude.canonical();
        sim.state.omega = omega;
        self.sim = sim;
        self.allocator.reset();
        self.goal = goal;
        self.steps = 0;
        self.done = false;
        let obs = self.observation();
        self.e_prev = obs.error_norm();
        Ok((obs, goal))
    }

    /// Advances one control period with the given normalized action.
    pub fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let a = action.clamped();
        let torque_max = self.base_model.wheels.torque_max;
        let channels: Vec<f64> = a.0.iter().map(|x| x * torque_max).collect();
        self.sim.schedule.inject(self.sim.state.t, &mut self.sim.array.fault_flags);
        let cmd = match self.allocator.allocate(&channels, &mut self.sim.array, torque_max) {
            Ok(c) => c,
            Err(e) => {
                self.done = true;
                return Err(e);
            }
        };
        self.advance(|_| cmd.clone())
    }

    /// Advances one control period, asking `controller` for raw wheel
    /// commands at every internal substep. Used by classical controllers
    /// that run at the integration rate.
    pub fn step_with<F>(&mut self, mut controller: F) -> Result<StepResult, EnvError>
    where
        F: FnMut(&Observation) -> Vec<f64>,
    {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let goal = self.goal;
        self.advance(move |state: &SpacecraftState| {
            controller(&Observation::new(&state.attitude, &goal, &state.omega))
        })
    }

    fn advance<F>(&mut self, mut command: F) -> Result<StepResult, EnvError>
    where
        F: FnMut(&SpacecraftState) -> Vec<f64>,
    {
        let n = self.sim.array.len();
        let dt = self.config.internal_dt();
        let sigma_abs = self.sim.state.attitude;
        let mut tau_cmd = vec![0.0; n];
        let mut tau_applied = vec![0.0; n];
        for _ in 0..self.config.substeps {
            let cmd = command(&self.sim.state);
            let applied = match self.sim.advance(&cmd, dt) {
                Ok(a) => a,
                Err(e) => {
                    self.done = true;
                    return Err(e.into());
                }
            };
            for i in 0..n {
                tau_cmd[i] += cmd[i];
                tau_applied[i] += applied[i];
            }
        }
        let k = self.config.substeps as f64;
        tau_cmd.iter_mut().for_each(|v| *v /= k);
        tau_applied.iter_mut().for_each(|v| *v /= k);

        let obs = self.observation();
        let e_curr = obs.error_norm();
        let omega_norm = obs.omega.norm();
        let reward = self.config.reward.evaluate(self.e_prev, e_curr, omega_norm);
        let info = TransitionInfo {
            sigma_abs,
            sigma_abs_next: self.sim.state.attitude,
            e_prev: self.e_prev,
            e_curr,
            omega_norm,
        };
        self.e_prev = e_curr;
        self.steps += 1;
        self.done = self.steps >= self.config.n_steps;
        Ok(StepResult {
            obs,
            reward,
            done: self.done,
            info,
            detail: StepDetail {
                t: self.sim.state.t,
                tau_cmd,
                tau_applied,
                wheel_speeds: self.sim.state.wheel_speeds.clone(),
                fault_flags: self.sim.array.fault_flags.clone(),
            },
        })
    }
}

/// Builds the transition record for one environment step.
pub fn make_transition(obs: &Observation, action: &Action, step: &StepResult) -> Transition {
    Transition {
        obs: *obs,
        action: action.clamped(),
        reward: step.reward,
        next_obs: step.obs,
        done: step.done,
        terminal: false,
        info: Some(step.info),
    }
}

/// Quaternion of a uniformly random rotation, used by tests as an
/// independent sampler.
pub fn random_quaternion<R: Rng>(rng: &mut R) -> UnitQuaternion {
    use rand_distr::{Distribution, StandardNormal};
    let mut c = [0.0f64; 4];
    for v in &mut c {
        *v = StandardNormal.sample(rng);
    }
    UnitQuaternion::new(c[0], Vector3::new(c[1], c[2], c[3])).canonical()
}
