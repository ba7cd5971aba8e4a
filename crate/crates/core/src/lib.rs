//! Reaction-wheel spacecraft attitude simulation and a fault-tolerant
//! TD3-HD reinforcement-learning controller (TD3 with hindsight experience
//! replay and dimension-wise gradient clipping), benchmarked against a
//! fixed-gain PD baseline.

pub mod agent;
pub mod attitude;
pub mod baseline;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;

pub use error::{AgentError, AttitudeError, CheckpointError, DynamicsError, EnvError, HarnessError, NetError};
