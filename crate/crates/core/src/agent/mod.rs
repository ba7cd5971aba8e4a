//! TD3 learner with hindsight relabeling and dimension-wise clipping of the
//! action-space policy gradient.

pub mod her;
pub mod redistribution;
pub mod replay;
pub mod train;

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation, Transition, ACTION_DIM, OBS_DIM};
use crate::error::AgentError;
use crate::nn::{Activation, AdamConfig, DenseNet, OptimizerState};

pub use her::{her_store, HerStrategy};
pub use redistribution::{redistribute, BackupPolicy, Redistribution, RedistributionWeights};
pub use replay::ReplayBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub gamma: f64,
    pub batch_size: usize,
    /// Critic updates per actor/target update.
    pub policy_delay: usize,
    pub polyak: f64,
    pub exploration_noise_std: f64,
    pub target_noise_std: f64,
    pub target_noise_clip: f64,
    pub dwc_enabled: bool,
    pub dwc_threshold: f64,
    pub dwc_adaptive: bool,
    /// Updates remembered by the adaptive threshold.
    pub dwc_window: usize,
    pub her_enabled: bool,
    pub her_k: usize,
    pub her_strategy: HerStrategy,
    pub alpha_is: f64,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    /// Scale applied to the freshly initialized actor output layer.
    pub actor_init_scale: f64,
    /// Per-component factors applied to observations before they reach a
    /// network (`[sigma_err; omega]`).
    pub obs_scale: [f64; OBS_DIM],
    /// Scaled observations are clamped to `±obs_clip`.
    pub obs_clip: f64,
    /// Bounds applied to critic regression targets.
    pub target_min: f64,
    pub target_max: f64,
    /// Weight of the mean squared action added to the actor loss.
    pub action_l2: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            batch_size: 128,
            policy_delay: 2,
            polyak: 0.005,
            exploration_noise_std: 0.1,
            target_noise_std: 0.2,
            target_noise_clip: 0.5,
            dwc_enabled: true,
            dwc_threshold: 0.2,
            dwc_adaptive: false,
            dwc_window: 1000,
            her_enabled: true,
            her_k: 4,
            her_strategy: HerStrategy::Future,
            alpha_is: 1.0,
            hidden: vec![256, 256],
            learning_rate: 3e-4,
            buffer_capacity: 1_000_000,
            actor_init_scale: 1e-3,
            obs_scale: [1.0, 1.0, 1.0, 10.0, 10.0, 10.0],
            action_l2: 0.2,
            obs_clip: 5.0,
            target_min: -20.0,
            target_max: 2.0,
        }
    }
}

impl AgentConfig {
    /// Plain TD3: no relabeling, no clipping.
    pub fn plain_td3() -> Self {
        Self {
            her_enabled: false,
            dwc_enabled: false,
            ..Self::default()
        }
    }

    pub fn variant(&self) -> &'static str {
        match (self.her_enabled, self.dwc_enabled) {
            (true, true) => "td3-hd",
            (false, false) => "td3",
            (true, false) => "td3-her",
            (false, true) => "td3-dwc",
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.policy_delay == 0 || self.buffer_capacity == 0 {
            return bad("batch_size, policy_delay and buffer_capacity must be positive");
        }
        if !(self.polyak > 0.0 && self.polyak <= 1.0) {
            return bad("polyak must lie in (0, 1]");
        }
        if self.exploration_noise_std < 0.0 || self.target_noise_std < 0.0 || self.target_noise_clip < 0.0 {
            return bad("noise parameters must be non-negative");
        }
        if !(self.dwc_threshold > 0.0) || self.dwc_window == 0 {
            return bad("dwc_threshold and dwc_window must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if !(self.target_min < self.target_max) {
            return bad("target_min must be below target_max");
        }
        if !(self.obs_clip > 0.0) {
            return bad("obs_clip must be positive");
        }
        if !(self.action_l2 >= 0.0) {
            return bad("action_l2 must be non-negative");
        }
        if !self.obs_scale.iter().all(|k| k.is_finite() && *k > 0.0) {
            return bad("obs_scale entries must be positive");
        }
        Ok(())
    }
}

/// Network input for `obs`.
pub fn scaled_obs(obs: &Observation, scale: &[f64; OBS_DIM], clip: f64) -> [f64; OBS_DIM] {
    let mut x = obs.to_array();
    for (v, k) in x.iter_mut().zip(scale) {
        *v = (*v * k).clamp(-clip, clip);
    }
    x
}

/// Actor, twin critics and their target copies.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: DenseNet,
    pub critic1: DenseNet,
    pub critic2: DenseNet,
    pub actor_target: DenseNet,
    pub critic1_target: DenseNet,
    pub critic2_target: DenseNet,
}

impl ActorCritic {
    pub fn new<R: Rng>(config: &AgentConfig, rng: &mut R) -> Self {
        let mut actor_sizes = vec![OBS_DIM];
        actor_sizes.extend(&config.hidden);
        actor_sizes.push(ACTION_DIM);
        let mut critic_sizes = vec![OBS_DIM + ACTION_DIM];
        critic_sizes.extend(&config.hidden);
        critic_sizes.push(1);

        let mut actor = DenseNet::new(&actor_sizes, Activation::Relu, Activation::Tanh, rng);
        actor.scale_output_layer(config.actor_init_scale);
        let critic1 = DenseNet::new(&critic_sizes, Activation::Relu, Activation::Identity, rng);
        let critic2 = DenseNet::new(&critic_sizes, Activation::Relu, Activation::Identity, rng);
        Self {
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
        }
    }

    pub fn nets(&self) -> [&DenseNet; 6] {
        [
            &self.actor,
            &self.critic1,
            &self.critic2,
            &self.actor_target,
            &self.critic1_target,
            &self.critic2_target,
        ]
    }

    pub fn nets_mut(&mut self) -> [&mut DenseNet; 6] {
        [
            &mut self.actor,
            &mut self.critic1,
            &mut self.critic2,
            &mut self.actor_target,
            &mut self.critic1_target,
            &mut self.critic2_target,
        ]
    }

    /// Target tracking for all three networks.
    pub fn polyak_update(&mut self, tau: f64) {
        polyak_update(&mut self.actor_target, &self.actor, tau);
        polyak_update(&mut self.critic1_target, &self.critic1, tau);
        polyak_update(&mut self.critic2_target, &self.critic2, tau);
    }
}

/// `target ← (1 − tau)·target + tau·online`.
pub fn polyak_update(target: &mut DenseNet, online: &DenseNet, tau: f64) {
    target.polyak_from(online, tau);
}

/// Clipped double-Q regression target.
pub fn td_target(reward: f64, gamma: f64, terminal: bool, q1: f64, q2: f64) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * q1.min(q2)
    }
}

/// Clamps every component of `g` to `[-c_i, c_i]` independently.
pub fn clip_dimensionwise(g: &mut [f64], thresholds: &[f64]) {
    for (v, c) in g.iter_mut().zip(thresholds) {
        *v = v.clamp(-c, *c);
    }
}

/// Per-dimension running statistics over the most recent updates.
#[derive(Debug, Clone, Default)]
struct GradientHistory {
    window: usize,
    /// (count, Σg, Σg²) per update.
    entries: VecDeque<[(f64, f64, f64); ACTION_DIM]>,
}

impl GradientHistory {
    fn push(&mut self, g: &DMatrix<f64>) {
        let mut e = [(0.0, 0.0, 0.0); ACTION_DIM];
        for col in g.column_iter() {
            for (i, v) in col.iter().enumerate() {
                e[i].0 += 1.0;
                e[i].1 += v;
                e[i].2 += v * v;
            }
        }
        self.entries.push_back(e);
        while self.entries.len() > self.window {
            self.entries.pop_front();
        }
    }

    fn std(&self) -> [f64; ACTION_DIM] {
        let mut out = [0.0; ACTION_DIM];
        for (i, o) in out.iter_mut().enumerate() {
            let (n, s, s2) = self
                .entries
                .iter()
                .fold((0.0, 0.0, 0.0), |acc, e| (acc.0 + e[i].0, acc.1 + e[i].1, acc.2 + e[i].2));
            if n > 1.0 {
                let mean = s / n;
                *o = ((s2 / n - mean * mean).max(0.0) * n / (n - 1.0)).sqrt();
            }
        }
        out
    }
}

/// Record of one call to `update`, kept when logging is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRecord {
    pub critic_update: u64,
    pub actor_updated: bool,
    pub critic_losses: (f64, f64),
    pub actor_loss: Option<f64>,
    /// Per sample: (reward, min target Q, max target Q, regression target).
    pub targets: Vec<(f64, f64, f64, f64)>,
    pub dwc_thresholds: Option<[f64; ACTION_DIM]>,
    /// Action gradients before and after clipping, one row per sample.
    pub dwc_pre: Vec<[f64; ACTION_DIM]>,
    pub dwc_post: Vec<[f64; ACTION_DIM]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss1: f64,
    pub critic_loss2: f64,
    pub actor_loss: Option<f64>,
}

pub struct Td3Agent {
    pub config: AgentConfig,
    pub nets: ActorCritic,
    pub actor_opt: OptimizerState,
    pub critic1_opt: OptimizerState,
    pub critic2_opt: OptimizerState,
    pub buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    critic_updates: u64,
    actor_updates: u64,
    history: GradientHistory,
    log: Option<Vec<UpdateRecord>>,
}

impl Td3Agent {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self, AgentError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nets = ActorCritic::new(&config, &mut rng);
        let adam = AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        };
        Ok(Self {
            actor_opt: OptimizerState::new(&nets.actor, adam),
            critic1_opt: OptimizerState::new(&nets.critic1, adam),
            critic2_opt: OptimizerState::new(&nets.critic2, adam),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            history: GradientHistory {
                window: config.dwc_window,
                entries: VecDeque::new(),
            },
            nets,
            rng,
            critic_updates: 0,
            actor_updates: 0,
            log: None,
            config,
        })
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    /// Restores the update counters, e.g. after loading a checkpoint.
    pub fn set_update_counts(&mut self, critic: u64, actor: u64) {
        self.critic_updates = critic;
        self.actor_updates = actor;
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Starts (or stops) keeping an `UpdateRecord` per update.
    pub fn set_logging(&mut self, on: bool) {
        self.log = if on { Some(Vec::new()) } else { None };
    }

    pub fn take_log(&mut self) -> Vec<UpdateRecord> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Deterministic policy output, optionally perturbed by Gaussian
    /// exploration noise and clamped to the action bounds.
    pub fn select_action(&mut self, obs: &Observation, explore: bool) -> Action {
        let out = self
            .nets
            .actor
            .predict_one(&scaled_obs(obs, &self.config.obs_scale, self.config.obs_clip))
            .expect("actor input size is fixed");
        let mut a = [0.0; ACTION_DIM];
        a.copy_from_slice(&out);
        if explore && self.config.exploration_noise_std > 0.0 {
            let noise = Normal::new(0.0, self.config.exploration_noise_std).expect("valid std");
            for v in &mut a {
                *v += noise.sample(&mut self.rng);
            }
        }
        Action(a).clamped()
    }

    /// Uniform sample from the action box.
    pub fn random_action(&mut self) -> Action {
        let mut a = [0.0; ACTION_DIM];
        for v in &mut a {
            *v = self.rng.gen_range(-1.0..=1.0);
        }
        Action(a)
    }

    /// Importance weight `(N·P(i))^(−α)`; sampling is uniform so this is 1
    /// for every α.
    pub fn is_weight(&self, _t: &Transition) -> f64 {
        let n_p: f64 = 1.0;
        n_p.powf(-self.config.alpha_is)
    }

    fn batch_matrices(&self, batch: &[&Transition]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let (k, c) = (&self.config.obs_scale, self.config.obs_clip);
        let b = batch.len();
        let mut s = DMatrix::zeros(OBS_DIM, b);
        let mut a = DMatrix::zeros(ACTION_DIM, b);
        let mut s2 = DMatrix::zeros(OBS_DIM, b);
        for (j, t) in batch.iter().enumerate() {
            s.column_mut(j).copy_from_slice(&scaled_obs(&t.obs, k, c));
            a.column_mut(j).copy_from_slice(&t.action.0);
            s2.column_mut(j).copy_from_slice(&scaled_obs(&t.next_obs, k, c));
        }
        (s, a, s2)
    }

    fn stack(s: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(OBS_DIM + ACTION_DIM, s.ncols());
        x.rows_mut(0, OBS_DIM).copy_from(s);
        x.rows_mut(OBS_DIM, ACTION_DIM).copy_from(a);
        x
    }

    /// One regression step of both critics toward the clipped double-Q target.
    pub fn critic_update(&mut self, batch: &[&Transition]) -> Result<(f64, f64), AgentError> {
        if batch.is_empty() {
            return Err(AgentError::InsufficientBuffer { have: 0, need: 1 });
        }
        let b = batch.len();
        let (s, a, s2) = self.batch_matrices(batch);

        let mut a2 = self.nets.actor_target.predict(&s2)?;
        if self.config.target_noise_std > 0.0 {
            let noise = Normal::new(0.0, self.config.target_noise_std).expect("valid std");
            let clip = self.config.target_noise_clip;
            for v in a2.iter_mut() {
                let eps: f64 = noise.sample(&mut self.rng);
                *v = (*v + eps.clamp(-clip, clip)).clamp(-1.0, 1.0);
            }
        }
        let x2 = Self::stack(&s2, &a2);
        let tq1 = self.nets.critic1_target.predict(&x2)?;
        let tq2 = self.nets.critic2_target.predict(&x2)?;

        let mut y = Vec::with_capacity(b);
        let mut targets = Vec::new();
        for (j, t) in batch.iter().enumerate() {
            let (q1, q2) = (tq1[(0, j)], tq2[(0, j)]);
            let yj = td_target(t.reward, self.config.gamma, t.terminal, q1, q2).clamp(self.config.target_min, self.config.target_max);
            y.push(yj);
            if self.log.is_some() {
                targets.push((t.reward, q1.min(q2), q1.max(q2), yj));
            }
        }
        let w: Vec<f64> = batch.iter().map(|t| self.is_weight(t)).collect();

        let x = Self::stack(&s, &a);
        let mut losses = [0.0; 2];
        for (k, loss) in losses.iter_mut().enumerate() {
            let (net, opt) = if k == 0 {
                (&mut self.nets.critic1, &mut self.critic1_opt)
            } else {
                (&mut self.nets.critic2, &mut self.critic2_opt)
            };
            let cache = net.forward_batch(&x)?;
            let q = cache.output();
            let mut grad = DMatrix::zeros(1, b);
            let mut l = 0.0;
            for j in 0..b {
                let d = q[(0, j)] - y[j];
                l += w[j] * d * d;
                grad[(0, j)] = 2.0 * w[j] * d / b as f64;
            }
            *loss = l / b as f64;
            let (g, _) = net.backward(&cache, &grad)?;
            opt.adam_step(net, &g)?;
        }
        if !losses.iter().all(|l| l.is_finite()) {
            return Err(AgentError::Diverged(format!("critic losses {losses:?}")));
        }
        if let Some(log) = self.log.as_mut() {
            log.push(UpdateRecord {
                critic_update: self.critic_updates + 1,
                actor_updated: false,
                critic_losses: (losses[0], losses[1]),
                actor_loss: None,
                targets,
                dwc_thresholds: None,
                dwc_pre: Vec::new(),
                dwc_post: Vec::new(),
            });
        }
        Ok((losses[0], losses[1]))
    }

    /// Current per-dimension clipping thresholds.
    pub fn dwc_thresholds(&self) -> [f64; ACTION_DIM] {
        if self.config.dwc_adaptive && !self.history.entries.is_empty() {
            self.history.std().map(|s| {
                let c = self.config.dwc_threshold * s;
                if c > 0.0 {
                    c
                } else {
                    self.config.dwc_threshold
                }
            })
        } else {
            [self.config.dwc_threshold; ACTION_DIM]
        }
    }

    /// Deterministic policy-gradient step on the actor. The gradient of Q1
    /// with respect to each action component is clipped independently
    /// before it is propagated into the actor parameters.
    pub fn actor_update_dwc(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        let b = batch.len();
        let (s, _, _) = self.batch_matrices(batch);
        let actor_cache = self.nets.actor.forward_batch(&s)?;
        let x = Self::stack(&s, actor_cache.output());
        let critic_cache = self.nets.critic1.forward_batch(&x)?;
        let q = critic_cache.output();
        let actions = actor_cache.output();
        let loss = -q.mean() + self.config.action_l2 * actions.norm_squared() / b as f64;

        let dq_dx = self
            .nets
            .critic1
            .input_gradient(&critic_cache, &DMatrix::from_element(1, b, 1.0))?;
        let mut g = dq_dx.rows(OBS_DIM, ACTION_DIM).into_owned();
        let thresholds = self.dwc_thresholds();
        let logging = self.log.is_some();
        let mut pre = Vec::new();
        let mut post = Vec::new();
        if self.config.dwc_adaptive {
            self.history.push(&g);
        }
        for mut col in g.column_iter_mut() {
            if logging {
                pre.push([col[0], col[1], col[2], col[3]]);
            }
            if self.config.dwc_enabled {
                clip_dimensionwise(col.as_mut_slice(), &thresholds);
            }
            if logging {
                post.push([col[0], col[1], col[2], col[3]]);
            }
        }
        // ascend Q: d(−mean Q)/da = −g / b
        let mut out_grad = g * (-1.0 / b as f64);
        if self.config.action_l2 > 0.0 {
            out_grad += actions * (2.0 * self.config.action_l2 / b as f64);
        }
        let (grads, _) = self.nets.actor.backward(&actor_cache, &out_grad)?;
        self.actor_opt.adam_step(&mut self.nets.actor, &grads)?;
        if !loss.is_finite() {
            return Err(AgentError::Diverged(format!("actor loss {loss}")));
        }
        if let Some(rec) = self.log.as_mut().and_then(|l| l.last_mut()) {
            rec.actor_updated = true;
            rec.actor_loss = Some(loss);
            rec.dwc_thresholds = self.config.dwc_enabled.then_some(thresholds);
            rec.dwc_pre = pre;
            rec.dwc_post = post;
        }
        Ok(loss)
    }

    /// One critic update on a fresh batch; every `policy_delay` critic
    /// updates also an actor update and a target update.
    pub fn update(&mut self) -> Result<UpdateStats, AgentError> {
        let need = self.config.batch_size;
        if self.buffer.len() < need {
            return Err(AgentError::InsufficientBuffer {
                have: self.buffer.len(),
                need,
            });
        }
        let idx = self.buffer.sample_indices(&mut self.rng, need);
        let batch: Vec<Transition> = idx.iter().map(|&i| *self.buffer.get(i).expect("index in range")).collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let (l1, l2) = self.critic_update(&refs)?;
        self.critic_updates += 1;
        let mut actor_loss = None;
        if self.critic_updates % self.config.policy_delay as u64 == 0 {
            actor_loss = Some(self.actor_update_dwc(&refs)?);
            self.nets.polyak_update(self.config.polyak);
            self.actor_updates += 1;
        }
        Ok(UpdateStats {
            critic_loss1: l1,
            critic_loss2: l2,
            actor_loss,
        })
    }

    /// Stores a finished episode, relabeling it when HER is enabled.
    pub fn store_episode(&mut self, episode: &[Transition], reward: &crate::env::RewardConfig) -> Result<usize, AgentError> {
        her_store(
            episode,
            &mut self.buffer,
            self.config.her_k,
            self.config.her_enabled,
            reward,
            &mut self.rng,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn td_target_examples() {
        assert_eq!(td_target(0.19, 0.99, true, 5.0, -3.0), 0.19);
        let y = td_target(0.19, 0.99, false, 1.0, 0.8);
        assert!((y - 0.982).abs() < 1e-12, "{y}");
    }

    #[test]
    fn clip_examples() {
        let mut g = [0.5, -0.1, 0.3, -0.9];
        clip_dimensionwise(&mut g, &[0.2; 4]);
        assert_eq!(g, [0.2, -0.1, 0.2, -0.2]);
        let mut g = [0.05, -0.2, 0.1999, 0.0];
        let before = g;
        clip_dimensionwise(&mut g, &[0.2; 4]);
        assert_eq!(g, before);
    }

    #[test]
    fn variant_names() {
        assert_eq!(AgentConfig::default().variant(), "td3-hd");
        assert_eq!(AgentConfig::plain_td3().variant(), "td3");
    }

    #[test]
    fn targets_start_equal_to_online() {
        let agent = Td3Agent::new(AgentConfig::default(), 0).unwrap();
        assert_eq!(agent.nets.actor, agent.nets.actor_target);
        assert_eq!(agent.nets.critic1, agent.nets.critic1_target);
        assert_eq!(agent.nets.critic2, agent.nets.critic2_target);
    }

    #[test]
    fn is_weight_is_one() {
        let obs = Observation {
            mrp_error: nalgebra::Vector3::zeros(),
            omega: nalgebra::Vector3::zeros(),
        };
        let t = Transition {
            obs,
            action: Action::zero(),
            reward: 0.0,
            next_obs: obs,
            done: false,
            terminal: false,
            info: None,
        };
        for alpha in [1.0, 0.0, 0.6] {
            let agent = Td3Agent::new(
                AgentConfig {
                    alpha_is: alpha,
                    hidden: vec![4],
                    ..AgentConfig::default()
                },
                0,
            )
            .unwrap();
            assert_eq!(agent.is_weight(&t), 1.0);
        }
    }

    #[test]
    fn update_needs_a_full_batch() {
        let mut agent = Td3Agent::new(
            AgentConfig {
                hidden: vec![8],
                ..AgentConfig::default()
            },
            0,
        )
        .unwrap();
        assert_eq!(
            agent.update().unwrap_err(),
            AgentError::InsufficientBuffer { have: 0, need: 128 }
        );
    }

    #[test]
    fn config_bounds_are_checked() {
        let bad = |c: AgentConfig| Td3Agent::new(c, 0).is_err();
        assert!(bad(AgentConfig { target_min: 2.0, target_max: 2.0, ..AgentConfig::default() }));
        assert!(bad(AgentConfig { obs_clip: 0.0, ..AgentConfig::default() }));
        assert!(bad(AgentConfig { action_l2: -1.0, ..AgentConfig::default() }));
        assert!(bad(AgentConfig { obs_scale: [1.0, 1.0, 0.0, 1.0, 1.0, 1.0], ..AgentConfig::default() }));
        assert!(!bad(AgentConfig { hidden: vec![4], ..AgentConfig::default() }));
    }

    #[test]
    fn scaled_obs_clamps() {
        let obs = Observation {
            mrp_error: nalgebra::Vector3::new(0.5, -0.25, 0.0),
            omega: nalgebra::Vector3::new(1.0, -0.25, 0.0),
        };
        let v = scaled_obs(&obs, &[1.0, 1.0, 1.0, 4.0, 4.0, 4.0], 2.0);
        assert_eq!(v, [0.5, -0.25, 0.0, 2.0, -1.0, 0.0]);
    }
}
