//! Scalar summaries of a telemetry trace.

use serde::{Deserialize, Serialize};

use super::telemetry::TelemetryRecord;
use crate::error::HarnessError;

/// Error below which the attitude counts as settled, degrees.
pub const SETTLE_THRESHOLD_DEG: f64 = 1.0;
/// How long the error must stay below the threshold, s.
pub const SETTLE_HOLD_S: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mean_err_pre_deg: f64,
    pub mean_err_post_deg: f64,
    /// Start of the first 100 s stretch spent below 1°; `None` if the run
    /// never settles.
    pub settle_time_s: Option<f64>,
    pub rms_omega_post: f64,
    /// Total variation of applied wheel torque per 1000 s, averaged over
    /// wheels, N·m.
    pub torque_smoothness: f64,
}

/// Summarizes `records` around `fault_time`. Without a fault both windows
/// cover the whole trace.
pub fn metrics(records: &[TelemetryRecord], fault_time: Option<f64>) -> Result<Metrics, HarnessError> {
    let t_end = records.last().map_or(0.0, |r| r.t);
    let (pre, post): (Vec<&TelemetryRecord>, Vec<&TelemetryRecord>) = match fault_time {
        Some(tf) => records.iter().partition(|r| r.t < tf),
        None => (records.iter().collect(), records.iter().collect()),
    };
    let tf = fault_time.unwrap_or(0.0);
    if pre.is_empty() {
        return Err(HarnessError::EmptyWindow { from: 0.0, to: tf });
    }
    if post.is_empty() {
        return Err(HarnessError::EmptyWindow { from: tf, to: t_end });
    }
    let mean = |w: &[&TelemetryRecord], f: &dyn Fn(&TelemetryRecord) -> f64| {
        w.iter().map(|r| f(r)).sum::<f64>() / w.len() as f64
    };
    Ok(Metrics {
        mean_err_pre_deg: mean(&pre, &|r| r.error_angle_deg),
        mean_err_post_deg: mean(&post, &|r| r.error_angle_deg),
        settle_time_s: settle_time(records),
        rms_omega_post: mean(&post, &|r| r.omega.iter().map(|w| w * w).sum()).sqrt(),
        torque_smoothness: torque_smoothness(records),
    })
}

pub fn settle_time(records: &[TelemetryRecord]) -> Option<f64> {
    let mut start: Option<f64> = None;
    for r in records {
        if r.error_angle_deg < SETTLE_THRESHOLD_DEG {
            let s = *start.get_or_insert(r.t);
            if r.t - s >= SETTLE_HOLD_S {
                return Some(s);
            }
        } else {
            start = None;
        }
    }
    None
}

pub fn torque_smoothness(records: &[TelemetryRecord]) -> f64 {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return 0.0;
    };
    let span = last.t - first.t;
    let n = first.wheel_count();
    if span <= 0.0 || n == 0 {
        return 0.0;
    }
    let tv: f64 = records
        .windows(2)
        .map(|w| {
            w[0].tau_applied
                .iter()
                .zip(&w[1].tau_applied)
                .map(|(a, b)| (b - a).abs())
                .sum::<f64>()
        })
        .sum();
    tv / n as f64 * 1000.0 / span
}
