//! Fixed-gain PD attitude controller with a static minimum-norm wheel
//! allocation. The allocation is built once from the healthy four-wheel
//! geometry and is never updated after a fault.

use nalgebra::{Matrix3, Matrix3x4, Matrix4x3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::agent::train::Policy;
use crate::dynamics::{pyramid_geometry, N_PRIMARY};
use crate::env::{Environment, StepResult};
use crate::error::{DynamicsError, EnvError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdGains {
    /// N·m per unit MRP error.
    pub kp: f64,
    /// N·m·s/rad
    pub kd: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self { kp: 0.02, kd: 0.2 }
    }
}

/// `u = −kp·σ_err − kd·ω`
pub fn pd_control(mrp_error: &Vector3<f64>, omega: &Vector3<f64>, gains: &PdGains) -> Vector3<f64> {
    -mrp_error * gains.kp - omega * gains.kd
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticAllocator {
    pinv: Matrix4x3<f64>,
}

impl StaticAllocator {
    pub fn new(geometry: &Matrix3x4<f64>) -> Result<Self, DynamicsError> {
        let ggt: Matrix3<f64> = geometry * geometry.transpose();
        if geometry.rank(1e-9) < 3 {
            return Err(DynamicsError::InvalidWheelParams(
                "allocation geometry is rank deficient".into(),
            ));
        }
        let inv = ggt.try_inverse().ok_or_else(|| {
            DynamicsError::InvalidWheelParams("allocation geometry is rank deficient".into())
        })?;
        Ok(Self {
            pinv: geometry.transpose() * inv,
        })
    }

    pub fn for_pyramid(beta: f64) -> Result<Self, DynamicsError> {
        Self::new(&pyramid_geometry(beta)?)
    }

    /// Minimum-norm wheel torques `τ = −G⁺·u` whose reaction is `u`.
    pub fn allocate(&self, u_body: &Vector3<f64>) -> Vector4<f64> {
        -(self.pinv * u_body)
    }
}

/// Convenience wrapper: `τ = −G⁺·u` for a given geometry.
pub fn allocate(u_body: &Vector3<f64>, geometry: &Matrix3x4<f64>) -> Result<Vector4<f64>, DynamicsError> {
    Ok(StaticAllocator::new(geometry)?.allocate(u_body))
}

/// PD law evaluated at every integration substep.
#[derive(Debug, Clone)]
pub struct PdController {
    pub gains: PdGains,
    allocator: StaticAllocator,
}

impl PdController {
    pub fn new(gains: PdGains, beta: f64) -> Result<Self, DynamicsError> {
        Ok(Self {
            gains,
            allocator: StaticAllocator::for_pyramid(beta)?,
        })
    }

    pub fn wheel_commands(&self, mrp_error: &Vector3<f64>, omega: &Vector3<f64>, n_wheels: usize) -> Vec<f64> {
        let tau = self.allocator.allocate(&pd_control(mrp_error, omega, &self.gains));
        let mut cmd = vec![0.0; n_wheels];
        cmd[..N_PRIMARY].copy_from_slice(tau.as_slice());
        cmd
    }
}

impl Policy for PdController {
    fn step(&mut self, env: &mut Environment) -> Result<StepResult, EnvError> {
        let n = env.simulator().array.len();
        let this = &*self;
        env.step_with(|obs| this.wheel_commands(&obs.mrp_error, &obs.omega, n))
    }
}
