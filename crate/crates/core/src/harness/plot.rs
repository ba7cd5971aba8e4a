//! Minimal SVG line charts for telemetry traces.

use std::fmt::Write as _;

use super::telemetry::TelemetryRecord;

const W: f64 = 900.0;
const H: f64 = 360.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 20.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 44.0;
const MAX_POINTS: usize = 4000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Renders `series` on shared axes.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let m = y0.abs().max(1e-9);
        y0 -= m;
        y1 += m;
    }
    let pw = W - PAD_L - PAD_R;
    let ph = H - PAD_T - PAD_B;
    let sx = |x: f64| PAD_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| PAD_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{PAD_L}" y="{PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(xv), H - PAD_B + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, PAD_L - 6.0, sy(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, PAD_L + pw / 2.0, H - 8.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        PAD_T + ph / 2.0,
        PAD_T + ph / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let stride = ser.points.len().div_ceil(MAX_POINTS).max(1);
        let mut d = String::new();
        for &(x, y) in ser.points.iter().step_by(stride) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(d, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, d.trim_end());
        let ly = PAD_T + 14.0 + 14.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#, W - PAD_R - 6.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

/// Error angle, body rate and applied wheel torques of one trace.
pub fn telemetry_charts(records: &[TelemetryRecord], label: &str) -> Vec<(&'static str, String)> {
    let pts = |f: &dyn Fn(&TelemetryRecord) -> f64| records.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    let err = line_chart(
        &format!("{label}: attitude error"),
        "time [s]",
        "error angle [deg]",
        &[Series { name: "error".into(), points: pts(&|r| r.error_angle_deg) }],
    );
    let rate = line_chart(
        &format!("{label}: body rate"),
        "time [s]",
        "|omega| [rad/s]",
        &[Series { name: "|omega|".into(), points: pts(&TelemetryRecord::omega_norm) }],
    );
    let n = records.first().map_or(0, TelemetryRecord::wheel_count);
    let torques: Vec<Series> = (0..n)
        .map(|i| Series {
            name: format!("RW{i}"),
            points: pts(&|r| r.tau_applied[i]),
        })
        .collect();
    let torque = line_chart(&format!("{label}: applied wheel torque"), "time [s]", "torque [N m]", &torques);
    vec![("error_angle.svg", err), ("body_rate.svg", rate), ("wheel_torque.svg", torque)]
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let svg = line_chart(
            "a < b",
            "x",
            "y",
            &[Series { name: "s".into(), points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)] }],
        );
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn flat_and_empty_series_render() {
        let flat = line_chart("t", "x", "y", &[Series { name: "c".into(), points: vec![(0.0, 0.0), (1.0, 0.0)] }]);
        assert!(!flat.contains("NaN") && !flat.contains("inf"));
        let empty = line_chart("t", "x", "y", &[]);
        assert!(empty.contains("</svg>"));
    }
}
