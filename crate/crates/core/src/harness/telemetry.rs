//! Per-control-step telemetry and its CSV form.

use std::io::{Read, Write};

use crate::error::HarnessError;

/// State at the start of a control step plus what the step did.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    /// Start of the control step, s.
    pub t: f64,
    pub sigma_err: [f64; 3],
    pub omega: [f64; 3],
    pub error_angle_deg: f64,
    /// Wheel torques over `[t, t + dt)`, N·m.
    pub tau_cmd: Vec<f64>,
    pub tau_applied: Vec<f64>,
    /// Wheel speeds at the end of the step, rad/s.
    pub wheel_speed: Vec<f64>,
    pub reward: f64,
    pub fault: Vec<bool>,
}

impl TelemetryRecord {
    pub fn wheel_count(&self) -> usize {
        self.tau_applied.len()
    }

    pub fn omega_norm(&self) -> f64 {
        self.omega.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

pub fn header(n_wheels: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "sigma_err_0", "sigma_err_1", "sigma_err_2", "omega_0", "omega_1", "omega_2", "error_angle_deg"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for prefix in ["tau_cmd", "tau_applied", "wheel_speed"] {
        h.extend((0..n_wheels).map(|i| format!("{prefix}_{i}")));
    }
    h.push("reward".into());
    h.extend((0..n_wheels).map(|i| format!("fault_{i}")));
    h
}

/// Writes records as CSV. Floats use the shortest representation that
/// parses back to the same bits.
pub fn write_csv<W: Write>(out: W, records: &[TelemetryRecord]) -> Result<(), HarnessError> {
    let n = records.first().map_or(0, TelemetryRecord::wheel_count);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n))?;
    let mut row: Vec<String> = Vec::new();
    for r in records {
        if r.wheel_count() != n || r.tau_cmd.len() != n || r.wheel_speed.len() != n || r.fault.len() != n {
            return Err(HarnessError::Telemetry(format!("record at t={} has inconsistent wheel count", r.t)));
        }
        row.clear();
        row.push(r.t.to_string());
        row.extend(r.sigma_err.iter().map(f64::to_string));
        row.extend(r.omega.iter().map(f64::to_string));
        row.push(r.error_angle_deg.to_string());
        for v in [&r.tau_cmd, &r.tau_applied, &r.wheel_speed] {
            row.extend(v.iter().map(f64::to_string));
        }
        row.push(r.reward.to_string());
        row.extend(r.fault.iter().map(|&f| u8::from(f).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TelemetryRecord>, HarnessError> {
    let mut rd = csv::Reader::from_reader(input);
    let head = rd.headers()?.clone();
    let extra = head.len().checked_sub(9).filter(|e| e % 4 == 0).ok_or_else(|| {
        HarnessError::Telemetry(format!("unexpected column count {}", head.len()))
    })?;
    let n = extra / 4;
    let expected = header(n);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(HarnessError::Telemetry("header does not match the telemetry layout".into()));
    }
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, HarnessError> {
            rec[i].parse::<f64>().map_err(|e| {
                HarnessError::Telemetry(format!("row {}, column {}: {e}", line + 2, expected[i]))
            })
        };
        let vec_at = |start: usize| (start..start + n).map(num).collect::<Result<Vec<f64>, _>>();
        let base = 8;
        let fault = (0..n)
            .map(|i| match &rec[base + 3 * n + 1 + i] {
                "0" => Ok(false),
                "1" => Ok(true),
                s => Err(HarnessError::Telemetry(format!("row {}: bad fault flag {s:?}", line + 2))),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        out.push(TelemetryRecord {
            t: num(0)?,
            sigma_err: [num(1)?, num(2)?, num(3)?],
            omega: [num(4)?, num(5)?, num(6)?],
            error_angle_deg: num(7)?,
            tau_cmd: vec_at(base)?,
            tau_applied: vec_at(base + n)?,
            wheel_speed: vec_at(base + 2 * n)?,
            reward: num(base + 3 * n)?,
            fault,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64) -> TelemetryRecord {
        TelemetryRecord {
            t,
            sigma_err: [0.1, -1e-300, 1.0 / 3.0],
            omega: [0.0, 2e-5, -0.7],
            error_angle_deg: 12.345678901234567,
            tau_cmd: vec![0.1, 0.2, 0.3, 0.4],
            tau_applied: vec![0.0, 0.2, 0.3, 0.4],
            wheel_speed: vec![1.0, -2.0, 3.5, 157.07963267948966],
            reward: -10.11,
            fault: vec![true, false, false, false],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rs = vec![rec(0.0), rec(1.0)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rs).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rs);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
