//! Rigid-body rotational dynamics driven by a reaction-wheel array.
//!
//! The body obeys Euler's equation with gyroscopic wheel coupling,
//!
//! ```text
//! J ω̇ = −ω × (J ω + h_w) + u,    h_w = G · I_w · Ω,    u = −G · τ
//! ```
//!
//! where `G` holds the wheel spin axes as columns, `Ω` the wheel speeds and
//! `τ` the torques driving the wheels. Wheel speeds follow `I_w Ω̇ = τ`, so
//! the only exchange of angular momentum is between body and wheels.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Matrix3x4, Matrix3xX, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::{mrp_rate, quat_from_mrp, AttitudeMRP};
use crate::error::DynamicsError;

/// 1500 rpm in rad/s.
pub const DEFAULT_SPEED_MAX: f64 = 1500.0 * 2.0 * std::f64::consts::PI / 60.0;
pub const DEFAULT_WHEEL_INERTIA: f64 = 4.67e-4;
pub const DEFAULT_TORQUE_MAX: f64 = 0.001;
pub const DEFAULT_BETA: f64 = std::f64::consts::FRAC_PI_4;
pub const DEFAULT_OMEGA_CAP: f64 = 10.0;
pub const N_PRIMARY: usize = 4;
pub const BACKUP_INDEX: usize = N_PRIMARY;

/// Symmetric positive-definite spacecraft inertia with its cached inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaMatrix {
    j: Matrix3<f64>,
    j_inv: Matrix3<f64>,
}

impl InertiaMatrix {
    pub fn new(j: Matrix3<f64>) -> Result<Self, DynamicsError> {
        if !j.iter().all(|v| v.is_finite()) || (j - j.transpose()).amax() > 1e-12 {
            return Err(DynamicsError::InvalidInertia);
        }
        let chol = j.cholesky().ok_or(DynamicsError::InvalidInertia)?;
        Ok(Self {
            j,
            j_inv: chol.inverse(),
        })
    }

    pub fn diagonal(x: f64, y: f64, z: f64) -> Result<Self, DynamicsError> {
        Self::new(Matrix3::from_diagonal(&Vector3::new(x, y, z)))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.j
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.j_inv
    }
}

impl Default for InertiaMatrix {
    fn default() -> Self {
        Self::diagonal(0.025, 0.05, 0.065).expect("default inertia is positive-definite")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WheelParams {
    /// Spin-axis inertia of one wheel, kg·m².
    pub inertia: f64,
    /// rad/s
    pub speed_max: f64,
    /// N·m
    pub torque_max: f64,
    /// Pyramid elevation angle, rad.
    pub beta: f64,
    pub has_backup: bool,
}

impl Default for WheelParams {
    fn default() -> Self {
        Self {
            inertia: DEFAULT_WHEEL_INERTIA,
            speed_max: DEFAULT_SPEED_MAX,
            torque_max: DEFAULT_TORQUE_MAX,
            beta: DEFAULT_BETA,
            has_backup: false,
        }
    }
}

impl WheelParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |what: &str| Err(DynamicsError::InvalidWheelParams(what.to_string()));
        if !(self.inertia > 0.0 && self.inertia.is_finite()) {
            return bad("inertia must be positive");
        }
        if !(self.speed_max > 0.0 && self.speed_max.is_finite()) {
            return bad("speed_max must be positive");
        }
        if !(self.torque_max > 0.0 && self.torque_max.is_finite()) {
            return bad("torque_max must be positive");
        }
        if !(self.beta > 0.0 && self.beta < FRAC_PI_2) {
            return Err(DynamicsError::InvalidElevation(self.beta));
        }
        Ok(())
    }

    pub fn wheel_count(&self) -> usize {
        if self.has_backup {
            N_PRIMARY + 1
        } else {
            N_PRIMARY
        }
    }
}

/// Spin axes of four wheels tilted at elevation `beta`, spaced 90° in azimuth.
pub fn pyramid_geometry(beta: f64) -> Result<Matrix3x4<f64>, DynamicsError> {
    if !(beta > 0.0 && beta < FRAC_PI_2) {
        return Err(DynamicsError::InvalidElevation(beta));
    }
    let (sb, cb) = beta.sin_cos();
    Ok(Matrix3x4::from_fn(|r, k| {
        let az = k as f64 * FRAC_PI_2;
        match r {
            0 => cb * az.cos(),
            1 => cb * az.sin(),
            _ => sb,
        }
    }))
}

/// Full array geometry, with the backup wheel along body z when present.
pub fn array_geometry(params: &WheelParams) -> Result<Matrix3xX<f64>, DynamicsError> {
    let pyramid = pyramid_geometry(params.beta)?;
    let n = params.wheel_count();
    let mut g = Matrix3xX::zeros(n);
    g.columns_mut(0, N_PRIMARY).copy_from(&pyramid);
    if params.has_backup {
        g.set_column(BACKUP_INDEX, &Vector3::z());
    }
    Ok(g)
}

/// Static wheel configuration plus the mutable fault/backup status.
#[derive(Debug, Clone, PartialEq)]
pub struct WheelArray {
    pub geometry: Matrix3xX<f64>,
    pub fault_flags: Vec<bool>,
    pub backup_active: bool,
}

impl WheelArray {
    pub fn new(params: &WheelParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        let geometry = array_geometry(params)?;
        let n = geometry.ncols();
        Ok(Self {
            geometry,
            fault_flags: vec![false; n],
            backup_active: false,
        })
    }

    pub fn len(&self) -> usize {
        self.geometry.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether wheel `i` may produce torque at all.
    pub fn is_operational(&self, i: usize) -> bool {
        !self.fault_flags[i] && (i < N_PRIMARY || self.backup_active)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacecraftState {
    pub attitude: AttitudeMRP,
    pub omega: Vector3<f64>,
    pub wheel_speeds: Vec<f64>,
    pub t: f64,
}

impl SpacecraftState {
    pub fn at_rest(n_wheels: usize) -> Self {
        Self {
            attitude: AttitudeMRP::zero(),
            omega: Vector3::zeros(),
            wheel_speeds: vec![0.0; n_wheels],
            t: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.attitude.sigma.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
            && self.wheel_speeds.iter().all(|v| v.is_finite())
            && self.t.is_finite()
    }
}

/// Everything about the spacecraft that does not change during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacecraftModel {
    pub inertia: InertiaMatrix,
    pub wheels: WheelParams,
    /// Include the `−ω × h_w` wheel-momentum coupling term.
    pub wheel_coupling: bool,
    pub omega_cap: f64,
}

impl Default for SpacecraftModel {
    fn default() -> Self {
        Self {
            inertia: InertiaMatrix::default(),
            wheels: WheelParams::default(),
            wheel_coupling: true,
            omega_cap: DEFAULT_OMEGA_CAP,
        }
    }
}

/// Reaction torque on the body, `u = −G·τ`.
pub fn body_torque(applied: &[f64], geometry: &Matrix3xX<f64>) -> Vector3<f64> {
    applied
        .iter()
        .zip(geometry.column_iter())
        .fold(Vector3::zeros(), |acc, (t, col)| acc - col * *t)
}

/// Wheel angular momentum expressed in body axes, `G·I_w·Ω`.
pub fn wheel_momentum(speeds: &[f64], geometry: &Matrix3xX<f64>, inertia_w: f64) -> Vector3<f64> {
    speeds
        .iter()
        .zip(geometry.column_iter())
        .fold(Vector3::zeros(), |acc, (s, col)| acc + col * (inertia_w * s))
}

/// Body angular acceleration from Euler's equation with wheel coupling.
pub fn omega_dot(
    omega: &Vector3<f64>,
    u: &Vector3<f64>,
    inertia: &InertiaMatrix,
    wheel_momentum: &Vector3<f64>,
) -> Vector3<f64> {
    let h = inertia.matrix() * omega + wheel_momentum;
    inertia.inverse() * (u - omega.cross(&h))
}

/// Applies fault, torque and speed limits to commanded wheel torques.
///
/// Returns `(applied, speed_dot)`. Torques are held constant over `dt`, so a
/// command is trimmed to the remaining speed headroom over that horizon;
/// a wheel already at its limit gets zero torque in the outward direction.
pub fn wheel_accel(
    commanded: &[f64],
    speeds: &[f64],
    array: &WheelArray,
    params: &WheelParams,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut applied = Vec::with_capacity(commanded.len());
    for (i, (&cmd, &speed)) in commanded.iter().zip(speeds).enumerate() {
        let tau = if !array.is_operational(i) || !cmd.is_finite() {
            0.0
        } else {
            let tau = cmd.clamp(-params.torque_max, params.torque_max);
            let hi = ((params.speed_max - speed) * params.inertia / dt).max(0.0);
            let lo = ((-params.speed_max - speed) * params.inertia / dt).min(0.0);
            tau.clamp(lo, hi)
        };
        applied.push(tau);
    }
    let speed_dot = applied.iter().map(|t| t / params.inertia).collect();
    (applied, speed_dot)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: SpacecraftState,
    pub applied: Vec<f64>,
}

/// One RK4 step of the coupled body/wheel ODE under zero-order-hold torques.
pub fn step(
    state: &SpacecraftState,
    commanded: &[f64],
    dt: f64,
    model: &SpacecraftModel,
    array: &WheelArray,
) -> Result<StepOutput, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidTimestep(dt));
    }
    let n = array.len();
    if commanded.len() != n || state.wheel_speeds.len() != n {
        return Err(DynamicsError::CommandLength {
            expected: n,
            got: commanded.len().min(state.wheel_speeds.len()),
        });
    }
    let params = &model.wheels;
    let (applied, speed_dot) = wheel_accel(commanded, &state.wheel_speeds, array, params, dt);
    let u = body_torque(&applied, &array.geometry);

    // Wheel speeds are linear in time over the step, so they are evaluated
    // in closed form at each RK4 stage.
    let speeds_at = |tau: f64| -> Vec<f64> {
        state
            .wheel_speeds
            .iter()
            .zip(&speed_dot)
            .map(|(s, d)| s + d * tau)
            .collect()
    };
    let deriv = |sigma: &Vector3<f64>, omega: &Vector3<f64>, tau: f64| {
        let hw = if model.wheel_coupling {
            wheel_momentum(&speeds_at(tau), &array.geometry, params.inertia)
        } else {
            Vector3::zeros()
        };
        (
            mrp_rate(&AttitudeMRP::from_vector(*sigma), omega),
            omega_dot(omega, &u, &model.inertia, &hw),
        )
    };

    let s0 = state.attitude.sigma;
    let w0 = state.omega;
    let (k1s, k1w) = deriv(&s0, &w0, 0.0);
    let (k2s, k2w) = deriv(&(s0 + k1s * (0.5 * dt)), &(w0 + k1w * (0.5 * dt)), 0.5 * dt);
    let (k3s, k3w) = deriv(&(s0 + k2s * (0.5 * dt)), &(w0 + k2w * (0.5 * dt)), 0.5 * dt);
    let (k4s, k4w) = deriv(&(s0 + k3s * dt), &(w0 + k3w * dt), dt);
    let sigma = s0 + (k1s + k2s * 2.0 + k3s * 2.0 + k4s) * (dt / 6.0);
    let omega = w0 + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (dt / 6.0);

    let mut wheel_speeds = speeds_at(dt);
    // trimmed commands land exactly on the limit; absorb rounding
    for s in &mut wheel_speeds {
        *s = s.clamp(-params.speed_max, params.speed_max);
    }

    let next = SpacecraftState {
        attitude: AttitudeMRP::from_vector(sigma).canonical(),
        omega,
        wheel_speeds,
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(DynamicsError::Diverged { t: next.t });
    }
    let norm = next.omega.norm();
    if norm > model.omega_cap {
        return Err(DynamicsError::OmegaCap {
            norm,
            cap: model.omega_cap,
        });
    }
    Ok(StepOutput {
        state: next,
        applied,
    })
}

/// Total angular momentum (body + wheels) in inertial axes.
pub fn inertial_momentum(state: &SpacecraftState, model: &SpacecraftModel, array: &WheelArray) -> Vector3<f64> {
    let hw = wheel_momentum(&state.wheel_speeds, &array.geometry, model.wheels.inertia);
    let h_body = model.inertia.matrix() * state.omega + hw;
    quat_from_mrp(&state.attitude).to_rotation_matrix() * h_body
}

/// Rotational kinetic energy of the rigid body alone, `½ωᵀJω`.
pub fn body_kinetic_energy(state: &SpacecraftState, model: &SpacecraftModel) -> f64 {
    0.5 * state.omega.dot(&(model.inertia.matrix() * state.omega))
}

const FAULT_TIME_TOL: f64 = 1e-9;

/// Latching wheel-failure schedule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultSchedule {
    entries: Vec<FaultEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEvent {
    pub wheel: usize,
    /// Seconds since the start of the run.
    pub time: f64,
}

impl FaultSchedule {
    pub fn new(entries: Vec<FaultEvent>) -> Result<Self, DynamicsError> {
        let schedule = Self { entries };
        schedule.validate(usize::MAX)?;
        Ok(schedule)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(wheel: usize, time: f64) -> Self {
        Self {
            entries: vec![FaultEvent { wheel, time }],
        }
    }

    pub fn entries(&self) -> &[FaultEvent] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self, n_wheels: usize) -> Result<(), DynamicsError> {
        let mut seen = Vec::new();
        for e in &self.entries {
            if e.wheel >= n_wheels {
                return Err(DynamicsError::FaultWheelOutOfRange {
                    wheel: e.wheel,
                    count: n_wheels,
                });
            }
            if !(e.time >= 0.0 && e.time.is_finite()) {
                return Err(DynamicsError::InvalidFaultTime(e.time));
            }
            if seen.contains(&e.wheel) {
                return Err(DynamicsError::DuplicateFault(e.wheel));
            }
            seen.push(e.wheel);
        }
        Ok(())
    }

    /// Latches the flag of every wheel whose fault time has been reached at
    /// the start time `t` of the upcoming step. `t` is a running sum of
    /// step sizes, so the comparison allows for its rounding drift.
    pub fn inject(&self, t: f64, flags: &mut [bool]) {
        for e in &self.entries {
            if t + FAULT_TIME_TOL * e.time.abs().max(1.0) >= e.time {
                if let Some(f) = flags.get_mut(e.wheel) {
                    *f = true;
                }
            }
        }
    }
}

/// A single spacecraft simulation: model, wheel status, state and faults.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub model: SpacecraftModel,
    pub array: WheelArray,
    pub state: SpacecraftState,
    pub schedule: FaultSchedule,
}

impl Simulator {
    pub fn new(model: SpacecraftModel, schedule: FaultSchedule) -> Result<Self, DynamicsError> {
        let array = WheelArray::new(&model.wheels)?;
        schedule.validate(array.len())?;
        let state = SpacecraftState::at_rest(array.len());
        Ok(Self {
            model,
            array,
            state,
            schedule,
        })
    }

    /// Latches scheduled faults at the current clock, then takes one step.
    pub fn advance(&mut self, commanded: &[f64], dt: f64) -> Result<Vec<f64>, DynamicsError> {
        self.schedule.inject(self.state.t, &mut self.array.fault_flags);
        let out = step(&self.state, commanded, dt, &self.model, &self.array)?;
        self.state = out.state;
        Ok(out.applied)
    }

    pub fn momentum(&self) -> Vector3<f64> {
        inertial_momentum(&self.state, &self.model, &self.array)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn pyramid_examples() {
        assert!(matches!(
            pyramid_geometry(deg(90.0)),
            Err(DynamicsError::InvalidElevation(_))
        ));
        assert!(pyramid_geometry(0.0).is_err());
        let g = pyramid_geometry(deg(45.0)).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], 0.707107, epsilon = 1e-6);
        assert_abs_diff_eq!(g[(1, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(2, 0)], 0.707107, epsilon = 1e-6);
        let sum: Vector3<f64> = g.column_iter().map(|c| c.into_owned()).sum();
        assert_abs_diff_eq!(sum.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sum.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sum.z, 2.828427, epsilon = 1e-6);
        for c in g.column_iter() {
            assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(g.rank(1e-9), 3);
    }

    #[test]
    fn body_torque_examples() {
        let g = array_geometry(&WheelParams::default()).unwrap();
        assert_eq!(body_torque(&[0.0; 4], &g), Vector3::zeros());
        let u = body_torque(&[0.1, 0.0, 0.0, 0.0], &g);
        assert_abs_diff_eq!(u.x, -0.070711, epsilon = 1e-6);
        assert_abs_diff_eq!(u.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.z, -0.070711, epsilon = 1e-6);
        let u = body_torque(&[0.05; 4], &g);
        assert_abs_diff_eq!(u.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.z, -0.141421, epsilon = 1e-6);
    }

    #[test]
    fn omega_dot_examples() {
        let j = InertiaMatrix::diagonal(1.0, 2.0, 3.0).unwrap();
        let z = Vector3::zeros();
        assert_eq!(omega_dot(&z, &z, &j, &z), z);
        let eye = InertiaMatrix::diagonal(1.0, 1.0, 1.0).unwrap();
        assert_eq!(omega_dot(&Vector3::new(0.3, -1.0, 2.0), &z, &eye, &z), z);
        let wd = omega_dot(&Vector3::new(1.0, 1.0, 0.0), &z, &j, &z);
        assert_abs_diff_eq!(wd.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wd.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wd.z, -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn inertia_rejects_bad_matrices() {
        assert!(InertiaMatrix::diagonal(1.0, 0.0, 1.0).is_err());
        assert!(InertiaMatrix::diagonal(1.0, -1.0, 1.0).is_err());
        let mut m = Matrix3::identity();
        m[(0, 1)] = 0.1;
        assert_eq!(InertiaMatrix::new(m), Err(DynamicsError::InvalidInertia));
    }

    #[test]
    fn wheel_accel_examples() {
        let params = WheelParams::default();
        let mut array = WheelArray::new(&params).unwrap();
        let speeds = [0.0; 4];
        let (applied, sd) = wheel_accel(&[4.67e-4, 0.0, 0.0, 0.0], &speeds, &array, &params, 0.1);
        assert_eq!(applied[0], 4.67e-4);
        assert_abs_diff_eq!(sd[0], 1.0, epsilon = 1e-12);

        array.fault_flags[2] = true;
        let (applied, sd) = wheel_accel(&[0.1, 0.1, 0.1, 0.1], &speeds, &array, &params, 0.1);
        assert_eq!((applied[2], sd[2]), (0.0, 0.0));

        let at_limit = [params.speed_max, 0.0, 0.0, 0.0];
        let (applied, _) = wheel_accel(&[5e-4, 0.0, 0.0, 0.0], &at_limit, &array, &params, 0.1);
        assert_eq!(applied[0], 0.0);
        let (applied, _) = wheel_accel(&[-5e-4, 0.0, 0.0, 0.0], &at_limit, &array, &params, 0.1);
        assert_eq!(applied[0], -5e-4);
    }

    #[test]
    fn wheel_accel_clamps_to_torque_limit() {
        let params = WheelParams::default();
        let array = WheelArray::new(&params).unwrap();
        let (applied, _) = wheel_accel(&[1.0, -1.0, 0.0, 0.0], &[0.0; 4], &array, &params, 1e-4);
        assert_eq!(applied[0], params.torque_max);
        assert_eq!(applied[1], -params.torque_max);
    }

    #[test]
    fn backup_wheel_idle_until_activated() {
        let params = WheelParams {
            has_backup: true,
            ..WheelParams::default()
        };
        let mut array = WheelArray::new(&params).unwrap();
        assert_eq!(array.len(), 5);
        assert_eq!(array.geometry.column(4).into_owned(), Vector3::z());
        let (applied, _) = wheel_accel(&[0.0, 0.0, 0.0, 0.0, 5e-4], &[0.0; 5], &array, &params, 0.1);
        assert_eq!(applied[4], 0.0);
        array.backup_active = true;
        let (applied, _) = wheel_accel(&[0.0, 0.0, 0.0, 0.0, 5e-4], &[0.0; 5], &array, &params, 0.1);
        assert_eq!(applied[4], 5e-4);
    }

    #[test]
    fn step_at_rest_only_advances_clock() {
        let model = SpacecraftModel::default();
        let array = WheelArray::new(&model.wheels).unwrap();
        let s = SpacecraftState::at_rest(4);
        let out = step(&s, &[0.0; 4], 0.37, &model, &array).unwrap();
        assert_eq!(out.state.attitude, s.attitude);
        assert_eq!(out.state.omega, s.omega);
        assert_eq!(out.state.wheel_speeds, s.wheel_speeds);
        assert_eq!(out.state.t, 0.37);
    }

    #[test]
    fn step_rejects_bad_dt() {
        let model = SpacecraftModel::default();
        let array = WheelArray::new(&model.wheels).unwrap();
        let s = SpacecraftState::at_rest(4);
        assert!(matches!(
            step(&s, &[0.0; 4], 0.0, &model, &array),
            Err(DynamicsError::InvalidTimestep(_))
        ));
    }

    #[test]
    fn step_reports_divergence() {
        let model = SpacecraftModel::default();
        let array = WheelArray::new(&model.wheels).unwrap();
        let mut s = SpacecraftState::at_rest(4);
        s.omega = Vector3::new(f64::NAN, 0.0, 0.0);
        assert!(matches!(
            step(&s, &[0.0; 4], 0.1, &model, &array),
            Err(DynamicsError::Diverged { .. })
        ));
    }

    #[test]
    fn fault_schedule_validation() {
        let dup = vec![
            FaultEvent { wheel: 0, time: 1.0 },
            FaultEvent { wheel: 0, time: 2.0 },
        ];
        assert_eq!(FaultSchedule::new(dup), Err(DynamicsError::DuplicateFault(0)));
        let s = FaultSchedule::single(7, 0.0);
        assert!(matches!(
            s.validate(4),
            Err(DynamicsError::FaultWheelOutOfRange { wheel: 7, .. })
        ));
        assert!(FaultSchedule::single(0, -1.0).validate(4).is_err());
    }

    #[test]
    fn fault_injection_latches() {
        let s = FaultSchedule::single(0, 3000.0);
        let mut flags = vec![false; 4];
        s.inject(2999.9, &mut flags);
        assert!(!flags[0]);
        s.inject(3000.0, &mut flags);
        assert!(flags[0]);
        s.inject(10.0, &mut flags);
        assert!(flags[0]);
        let mut flags = vec![false; 4];
        FaultSchedule::none().inject(1e9, &mut flags);
        assert_eq!(flags, vec![false; 4]);
    }

    #[test]
    fn fault_at_time_zero_never_produces_torque() {
        let mut sim = Simulator::new(SpacecraftModel::default(), FaultSchedule::single(0, 0.0)).unwrap();
        for _ in 0..50 {
            let applied = sim.advance(&[0.01; 4], 0.1).unwrap();
            assert_eq!(applied[0], 0.0);
        }
        assert_eq!(sim.state.wheel_speeds[0], 0.0);
    }
}
