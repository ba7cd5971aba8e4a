//! Hindsight relabeling with the "future" strategy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::replay::ReplayBuffer;
use crate::env::{Goal, Observation, RewardConfig, Transition};
use crate::error::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HerStrategy {
    /// Substitute goals are attitudes reached later in the same episode.
    #[default]
    Future,
}

/// Copy of `t` as if the episode had been chasing `goal`.
pub fn relabel(t: &Transition, goal: &Goal, reward: &RewardConfig) -> Result<Transition, AgentError> {
    let info = t.info.ok_or(AgentError::MissingInfo)?;
    let obs = Observation::new(&info.sigma_abs, goal, &t.obs.omega);
    let next_obs = Observation::new(&info.sigma_abs_next, goal, &t.next_obs.omega);
    let e_prev = obs.error_norm();
    let e_curr = next_obs.error_norm();
    let mut info = info;
    info.e_prev = e_prev;
    info.e_curr = e_curr;
    Ok(Transition {
        obs,
        action: t.action,
        reward: reward.evaluate(e_prev, e_curr, info.omega_norm),
        next_obs,
        done: t.done,
        terminal: t.terminal,
        info: Some(info),
    })
}

/// Stores an episode, plus `k` relabeled copies of every transition that has
/// a later state in the episode to borrow a goal from.
///
/// Returns the number of relabeled transitions added.
pub fn her_store<R: Rng>(
    episode: &[Transition],
    buffer: &mut ReplayBuffer,
    k: usize,
    enabled: bool,
    reward: &RewardConfig,
    rng: &mut R,
) -> Result<usize, AgentError> {
    if episode.iter().any(|t| t.info.is_none()) && enabled && k > 0 {
        return Err(AgentError::MissingInfo);
    }
    let relabel_ok = enabled && k > 0 && episode.len() >= 2;
    let mut added = 0;
    for (t, tr) in episode.iter().enumerate() {
        buffer.push(*tr);
        if !relabel_ok || t + 1 >= episode.len() {
            continue;
        }
        for _ in 0..k {
            let j = rng.gen_range(t + 1..episode.len());
            let goal = Goal::new(episode[j].info.expect("checked above").sigma_abs);
            buffer.push(relabel(tr, &goal, reward)?);
            added += 1;
        }
    }
    Ok(added)
}
