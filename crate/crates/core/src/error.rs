use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttitudeError {
    #[error("quaternion with q0 = {q0} has no MRP in the canonical set")]
    SingularQuaternion { q0: f64 },
    #[error("shadow set is undefined for the zero MRP")]
    ZeroShadow,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("pyramid elevation {0} rad is outside (0, π/2)")]
    InvalidElevation(f64),
    #[error("inertia matrix is not symmetric positive-definite")]
    InvalidInertia,
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimestep(f64),
    #[error("invalid wheel parameter: {0}")]
    InvalidWheelParams(String),
    #[error("fault scheduled for wheel {wheel} but the array has {count} wheels")]
    FaultWheelOutOfRange { wheel: usize, count: usize },
    #[error("wheel {0} appears more than once in the fault schedule")]
    DuplicateFault(usize),
    #[error("fault time {0} s must be finite and non-negative")]
    InvalidFaultTime(f64),
    #[error("command vector has {got} entries, expected {expected}")]
    CommandLength { expected: usize, got: usize },
    #[error("simulation diverged at t = {t} s")]
    Diverged { t: f64 },
    #[error("angular velocity {norm} rad/s exceeds the simulation cap of {cap} rad/s")]
    OmegaCap { norm: f64, cap: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    EpisodeDone,
    #[error("action has {got} components, expected {expected}")]
    ActionLength { expected: usize, got: usize },
    #[error("every wheel is faulted and no backup is available")]
    AllWheelsFaulted,
    #[error("invalid episode configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("input has {got} features, network expects {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("cache does not match the network it is used with")]
    StaleCache,
    #[error("gradient contains non-finite values")]
    NonFiniteGradient,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("replay buffer holds {have} transitions, batch needs {need}")]
    InsufficientBuffer { have: usize, need: usize },
    #[error("transition is missing the absolute attitudes needed for relabeling")]
    MissingInfo,
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint was written for a different configuration (hash mismatch)")]
    ConfigMismatch,
    #[error("checkpoint layout does not match the agent: {0}")]
    Layout(String),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("metrics window [{from}, {to}) s contains no records")]
    EmptyWindow { from: f64, to: f64 },
    #[error("telemetry parse error: {0}")]
    Telemetry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
