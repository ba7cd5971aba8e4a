//! Experiment harness: configuration, telemetry, metrics, checkpoints,
//! plots and the scenario driver behind the `rwctl` binary.

pub mod checkpoint;
pub mod config;
pub mod metrics;
pub mod plot;
pub mod run;
pub mod telemetry;

pub use config::{RunConfig, ScenarioConfig};
pub use metrics::{metrics, Metrics};
pub use run::AgentKind;
pub use telemetry::TelemetryRecord;
