//! Fault-aware torque redistribution across the wheel array.
//!
//! Each of the four action channels nominally drives its own wheel with
//! weight `λ_i = 1/4`. A faulted wheel gets `λ_i = 0` and the remaining
//! weights are renormalized over the operational set. When a backup wheel is
//! available it takes over the channel of the (first) faulted wheel and
//! inherits that channel's renormalized weight. The torque sent to wheel `i`
//! is `λ_i · n_active · τ_channel(i)`, which is the identity when no wheel has
//! failed.

use serde::{Deserialize, Serialize};

use crate::dynamics::{WheelArray, BACKUP_INDEX, N_PRIMARY};
use crate::error::EnvError;

#[derive(Debug, Clone, PartialEq)]
pub struct RedistributionWeights {
    pub lambda: Vec<f64>,
}

impl RedistributionWeights {
    pub fn nominal() -> Self {
        Self {
            lambda: vec![1.0 / N_PRIMARY as f64; N_PRIMARY],
        }
    }

    pub fn active_sum(&self) -> f64 {
        self.lambda.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Redistribution {
    /// One weight per physical wheel (4, or 5 with a backup).
    pub weights: RedistributionWeights,
    /// `channel_of[wheel]` is the action channel driving that wheel, if any.
    pub channel_of: Vec<Option<usize>>,
    pub n_active: usize,
}

impl Redistribution {
    /// Maps per-channel torques onto physical wheel commands.
    pub fn apply(&self, channel_torques: &[f64]) -> Vec<f64> {
        let scale = self.n_active as f64;
        self.channel_of
            .iter()
            .zip(&self.weights.lambda)
            .map(|(ch, lambda)| match ch {
                Some(c) => lambda * scale * channel_torques[*c],
                None => 0.0,
            })
            .collect()
    }
}

/// Computes the weights and channel routing for the given fault state.
///
/// `nominal` holds the no-fault weight of each primary channel;
/// `fault_flags` has one entry per physical wheel.
pub fn redistribute(
    nominal: &[f64],
    fault_flags: &[bool],
    backup_available: bool,
) -> Result<Redistribution, EnvError> {
    let n_wheels = fault_flags.len();
    let mut lambda = vec![0.0; n_wheels];
    let mut channel_of: Vec<Option<usize>> = vec![None; n_wheels];
    for i in 0..N_PRIMARY.min(n_wheels) {
        if !fault_flags[i] {
            lambda[i] = nominal[i];
            channel_of[i] = Some(i);
        }
    }
    let backup_ok = backup_available && n_wheels > BACKUP_INDEX && !fault_flags[BACKUP_INDEX];
    if backup_ok {
        if let Some(failed) = (0..N_PRIMARY).find(|&i| fault_flags[i]) {
            lambda[BACKUP_INDEX] = nominal[failed];
            channel_of[BACKUP_INDEX] = Some(failed);
        }
    }
    let total: f64 = lambda.iter().sum();
    let n_active = channel_of.iter().filter(|c| c.is_some()).count();
    if n_active == 0 || total <= 0.0 {
        return Err(EnvError::AllWheelsFaulted);
    }
    for l in &mut lambda {
        *l /= total;
    }
    Ok(Redistribution {
        weights: RedistributionWeights { lambda },
        channel_of,
        n_active,
    })
}

/// When the backup wheel is switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum BackupPolicy {
    Never,
    /// As soon as any primary wheel is faulted.
    OnFault,
    /// After a fault, once some operational wheel has been asked for its full
    /// torque for `steps` consecutive control steps.
    OnSaturation { steps: usize },
}

impl Default for BackupPolicy {
    fn default() -> Self {
        BackupPolicy::Never
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocatorMode {
    /// Channel `i` drives wheel `i`; the backup is never used.
    Identity,
    #[default]
    Redistribute,
}

/// Stateful allocator used by the environment each control step.
#[derive(Debug, Clone, PartialEq)]
pub struct Redistributor {
    pub mode: AllocatorMode,
    pub policy: BackupPolicy,
    saturated_steps: usize,
    last: Option<Redistribution>,
}

impl Redistributor {
    pub fn new(mode: AllocatorMode, policy: BackupPolicy) -> Self {
        Self {
            mode,
            policy,
            saturated_steps: 0,
            last: None,
        }
    }

    pub fn reset(&mut self) {
        self.saturated_steps = 0;
        self.last = None;
    }

    pub fn last(&self) -> Option<&Redistribution> {
        self.last.as_ref()
    }

    /// Turns channel torques into wheel commands, activating the backup wheel
    /// in `array` when the policy calls for it.
    pub fn allocate(
        &mut self,
        channel_torques: &[f64],
        array: &mut WheelArray,
        torque_max: f64,
    ) -> Result<Vec<f64>, EnvError> {
        let n = array.len();
        if self.mode == AllocatorMode::Identity {
            let mut cmd = vec![0.0; n];
            cmd[..N_PRIMARY].copy_from_slice(&channel_torques[..N_PRIMARY]);
            return Ok(cmd);
        }
        let has_backup = n > BACKUP_INDEX;
        let any_fault = array.fault_flags[..N_PRIMARY].iter().any(|&f| f);
        let nominal = RedistributionWeights::nominal().lambda;

        if has_backup && any_fault && !array.backup_active {
            match self.policy {
                BackupPolicy::Never => {}
                BackupPolicy::OnFault => array.backup_active = true,
                BackupPolicy::OnSaturation { steps } => {
                    let plan = redistribute(&nominal, &array.fault_flags, false)?;
                    let saturated = plan
                        .apply(channel_torques)
                        .iter()
                        .any(|t| t.abs() >= torque_max);
                    self.saturated_steps = if saturated { self.saturated_steps + 1 } else { 0 };
                    if self.saturated_steps >= steps {
                        array.backup_active = true;
                    }
                }
            }
        }
        let plan = redistribute(&nominal, &array.fault_flags, array.backup_active)?;
        let cmd = plan.apply(channel_torques);
        self.last = Some(plan);
        Ok(cmd)
    }
}
