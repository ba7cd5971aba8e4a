//! Interaction/training loop and deterministic policy evaluation.

use serde::{Deserialize, Serialize};

use crate::agent::{scaled_obs, Td3Agent};
use crate::dynamics::FaultSchedule;
use crate::env::{make_transition, Action, Environment, EpisodeConfig, Observation, StepResult, Transition, OBS_DIM};
use crate::error::{AgentError, EnvError};
use crate::nn::DenseNet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Environment steps to collect.
    pub total_steps: usize,
    /// Steps collected before the first gradient update.
    pub warmup_steps: usize,
    /// Draw warmup actions uniformly from the action box instead of the
    /// noisy policy.
    pub warmup_random: bool,
    /// Environment steps between evaluations (0 disables periodic evaluation).
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Seed of the first evaluation episode; episode `i` uses `eval_seed + i`.
    pub eval_seed: u64,
    /// Faults applied during evaluation episodes (times from episode start).
    pub eval_fault_schedule: FaultSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_steps: 100_000,
            warmup_steps: 1000,
            warmup_random: true,
            eval_interval: 5000,
            eval_episodes: 20,
            eval_seed: 1_000_000,
            eval_fault_schedule: FaultSchedule::single(0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub mean_return: f64,
    /// Error angle averaged over every step of every episode, degrees.
    pub mean_error_deg: f64,
    pub mean_final_error_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub env_steps: usize,
    pub stats: EvalStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub variant: String,
    pub seed: u64,
    pub env_steps: usize,
    pub episodes: usize,
    pub critic_updates: u64,
    pub actor_updates: u64,
    pub evals: Vec<EvalPoint>,
    pub final_critic_losses: Option<(f64, f64)>,
}

/// Something that can drive the environment through one control step.
pub trait Policy {
    fn step(&mut self, env: &mut Environment) -> Result<StepResult, EnvError>;
}

/// Deterministic actor policy.
pub struct ActorPolicy<'a> {
    pub actor: &'a DenseNet,
    pub obs_scale: [f64; OBS_DIM],
    pub obs_clip: f64,
}

impl<'a> ActorPolicy<'a> {
    pub fn new(agent: &'a Td3Agent) -> Self {
        Self {
            actor: &agent.nets.actor,
            obs_scale: agent.config.obs_scale,
            obs_clip: agent.config.obs_clip,
        }
    }

    pub fn act(&self, obs: &Observation) -> Action {
        let out = self
            .actor
            .predict_one(&scaled_obs(obs, &self.obs_scale, self.obs_clip))
            .expect("actor input size is fixed");
        let mut a = [0.0; crate::env::ACTION_DIM];
        a.copy_from_slice(&out);
        Action(a).clamped()
    }
}

impl Policy for ActorPolicy<'_> {
    fn step(&mut self, env: &mut Environment) -> Result<StepResult, EnvError> {
        let a = self.act(&env.observation());
        env.step(&a)
    }
}

/// Runs `seeds.len()` full episodes and averages return and error angle.
pub fn evaluate<P: Policy>(
    env: &mut Environment,
    policy: &mut P,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<EvalStats, EnvError> {
    let mut returns = Vec::new();
    let mut err_sum = 0.0;
    let mut err_n = 0usize;
    let mut finals = Vec::new();
    for seed in seeds {
        env.reset(seed)?;
        let mut ret = 0.0;
        let mut last;
        loop {
            let r = policy.step(env)?;
            ret += r.reward;
            last = r.obs.error_angle().to_degrees();
            err_sum += last;
            err_n += 1;
            if r.done {
                break;
            }
        }
        returns.push(ret);
        finals.push(last);
    }
    let n = returns.len().max(1) as f64;
    Ok(EvalStats {
        mean_return: returns.iter().sum::<f64>() / n,
        mean_error_deg: if err_n > 0 { err_sum / err_n as f64 } else { 0.0 },
        mean_final_error_deg: finals.iter().sum::<f64>() / n,
    })
}

/// Evaluation environment matching `config` but with a fixed fault schedule
/// and no random faults.
pub fn eval_environment(train_env: &Environment, schedule: &FaultSchedule) -> Result<Environment, EnvError> {
    let mut cfg: EpisodeConfig = train_env.config.clone();
    cfg.random_fault.probability = 0.0;
    cfg.fault_schedule = schedule.clone();
    Environment::new(train_env.model().clone(), cfg)
}

pub fn evaluate_actor(agent: &Td3Agent, env: &mut Environment, cfg: &TrainConfig) -> Result<EvalStats, EnvError> {
    let seeds = (0..cfg.eval_episodes as u64).map(|i| cfg.eval_seed + i);
    evaluate(env, &mut ActorPolicy::new(agent), seeds)
}

/// Seed of training episode `k` for run `seed`.
pub fn episode_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k.wrapping_mul(0xBF58_476D_1CE4_E5B9)) ^ 0x94D0_49BB_1331_11EB
}

/// Collects experience and trains the agent. `on_eval` sees every
/// evaluation point as it is produced.
pub fn train<F>(
    agent: &mut Td3Agent,
    env: &mut Environment,
    cfg: &TrainConfig,
    seed: u64,
    mut on_eval: F,
) -> Result<TrainReport, AgentError>
where
    F: FnMut(&EvalPoint, &Td3Agent),
{
    let mut eval_env = eval_environment(env, &cfg.eval_fault_schedule)?;
    let mut report = TrainReport {
        variant: agent.config.variant().to_string(),
        seed,
        env_steps: 0,
        episodes: 0,
        critic_updates: 0,
        actor_updates: 0,
        evals: Vec::new(),
        final_critic_losses: None,
    };
    let initial = EvalPoint {
        env_steps: 0,
        stats: evaluate_actor(agent, &mut eval_env, cfg)?,
    };
    on_eval(&initial, agent);
    report.evals.push(initial);

    let reward_cfg = env.config.reward;
    let mut episode: Vec<Transition> = Vec::with_capacity(env.config.n_steps);
    let mut k = 0u64;
    let (mut obs, _) = env.reset(episode_seed(seed, k))?;
    for step in 1..=cfg.total_steps {
        let action = if cfg.warmup_random && step <= cfg.warmup_steps {
            agent.random_action()
        } else {
            agent.select_action(&obs, true)
        };
        let r = env.step(&action)?;
        episode.push(make_transition(&obs, &action, &r));
        obs = r.obs;
        if r.done {
            agent.store_episode(&episode, &reward_cfg)?;
            episode.clear();
            report.episodes += 1;
            k += 1;
            obs = env.reset(episode_seed(seed, k))?.0;
        }
        if step > cfg.warmup_steps && agent.buffer.len() >= agent.config.batch_size {
            let stats = agent.update()?;
            report.final_critic_losses = Some((stats.critic_loss1, stats.critic_loss2));
        }
        report.env_steps = step;
        if cfg.eval_interval > 0 && (step % cfg.eval_interval == 0 || step == cfg.total_steps) {
            let point = EvalPoint {
                env_steps: step,
                stats: evaluate_actor(agent, &mut eval_env, cfg)?,
            };
            on_eval(&point, agent);
            report.evals.push(point);
        }
    }
    report.critic_updates = agent.critic_updates();
    report.actor_updates = agent.actor_updates();
    Ok(report)
}
