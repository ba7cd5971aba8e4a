//! Rotation representations and attitude kinematics.
//!
//! Two interchangeable representations are used: a unit quaternion
//! `(q0, qv)` with scalar-first storage and Hamilton product, and Modified
//! Rodrigues Parameters `sigma = qv / (1 + q0)`. Both describe the rotation
//! of the body frame relative to the inertial frame, so `q ⊗ v_body ⊗ q*`
//! yields the inertial components of a body-frame vector.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::AttitudeError;

/// Cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Scalar-first unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub q0: f64,
    pub qv: Vector3<f64>,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        Self {
            q0: 1.0,
            qv: Vector3::zeros(),
        }
    }

    /// Builds a quaternion from raw components and renormalizes it.
    pub fn new(q0: f64, qv: Vector3<f64>) -> Self {
        Self { q0, qv }.normalized()
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 || angle == 0.0 {
            return Self::identity();
        }
        let half = 0.5 * angle;
        Self {
            q0: half.cos(),
            qv: axis / n * half.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.q0 * self.q0 + self.qv.norm_squared()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            q0: self.q0 / n,
            qv: self.qv / n,
        }
    }

    /// Flips the overall sign so that `q0 >= 0`.
    pub fn canonical(&self) -> Self {
        if self.q0 < 0.0 {
            Self {
                q0: -self.q0,
                qv: -self.qv,
            }
        } else {
            *self
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            q0: self.q0,
            qv: -self.qv,
        }
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            q0: self.q0 * rhs.q0 - self.qv.dot(&rhs.qv),
            qv: rhs.qv * self.q0 + self.qv * rhs.q0 + self.qv.cross(&rhs.qv),
        }
    }

    /// Time derivative `½ q ⊗ (0, ω)` for a body-frame angular velocity.
    pub fn derivative(&self, omega: &Vector3<f64>) -> Self {
        Self {
            q0: -0.5 * self.qv.dot(omega),
            qv: (omega * self.q0 + self.qv.cross(omega)) * 0.5,
        }
    }

    /// Body-to-inertial direction cosine matrix.
    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let q = self.normalized();
        let s = skew(&q.qv);
        Matrix3::identity() + s * (2.0 * q.q0) + s * s * 2.0
    }

    /// Principal rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let c = self.canonical();
        2.0 * c.qv.norm().atan2(c.q0)
    }

    /// True when both quaternions describe the same rotation (equal up to sign).
    pub fn same_rotation(&self, other: &Self, tol: f64) -> bool {
        let diff = (self.q0 - other.q0).abs().max((self.qv - other.qv).amax());
        let sum = (self.q0 + other.q0).abs().max((self.qv + other.qv).amax());
        diff.min(sum) <= tol
    }
}

/// Modified Rodrigues Parameters of the body attitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeMRP {
    pub sigma: Vector3<f64>,
}

impl Default for AttitudeMRP {
    fn default() -> Self {
        Self::zero()
    }
}

impl AttitudeMRP {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            sigma: Vector3::new(x, y, z),
        }
    }

    pub fn from_vector(sigma: Vector3<f64>) -> Self {
        Self { sigma }
    }

    pub fn zero() -> Self {
        Self {
            sigma: Vector3::zeros(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.sigma.norm()
    }

    /// Rotation of `angle` about `axis`, returned in the canonical set.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let q = UnitQuaternion::from_axis_angle(axis, angle).canonical();
        mrp_from_quat(&q).unwrap_or_else(|_| Self::zero())
    }

    /// Switches to the shadow set when `|sigma| > 1`; ties keep the current set.
    pub fn canonical(&self) -> Self {
        if self.sigma.norm_squared() > 1.0 {
            // norm > 1 so the shadow is always defined
            Self {
                sigma: -self.sigma / self.sigma.norm_squared(),
            }
        } else {
            *self
        }
    }
}

/// Converts a canonical quaternion to MRPs.
pub fn mrp_from_quat(q: &UnitQuaternion) -> Result<AttitudeMRP, AttitudeError> {
    let denom = 1.0 + q.q0;
    if denom <= 0.0 {
        return Err(AttitudeError::SingularQuaternion { q0: q.q0 });
    }
    Ok(AttitudeMRP {
        sigma: q.qv / denom,
    })
}

pub fn quat_from_mrp(s: &AttitudeMRP) -> UnitQuaternion {
    let s2 = s.sigma.norm_squared();
    let d = 1.0 + s2;
    UnitQuaternion {
        q0: (1.0 - s2) / d,
        qv: s.sigma * (2.0 / d),
    }
}

/// Shadow MRP set `-sigma / |sigma|²`; describes the same rotation.
pub fn mrp_shadow(s: &AttitudeMRP) -> Result<AttitudeMRP, AttitudeError> {
    let s2 = s.sigma.norm_squared();
    if s2 == 0.0 {
        return Err(AttitudeError::ZeroShadow);
    }
    Ok(AttitudeMRP {
        sigma: -s.sigma / s2,
    })
}

/// Rotation from the target frame to the current body frame,
/// `q_target⁻¹ ⊗ q_current`, in the canonical MRP set.
pub fn mrp_error(current: &AttitudeMRP, target: &AttitudeMRP) -> AttitudeMRP {
    let qc = quat_from_mrp(current);
    let qt = quat_from_mrp(target);
    let qe = qt.conjugate().mul(&qc).canonical();
    // canonical quaternion has q0 >= 0, so 1 + q0 >= 1
    AttitudeMRP {
        sigma: qe.qv / (1.0 + qe.q0),
    }
    .canonical()
}

/// Principal rotation angle `4·atan(|sigma|)`.
pub fn principal_angle(s: &AttitudeMRP) -> f64 {
    4.0 * s.norm().atan()
}

/// MRP kinematics matrix `B(sigma)` with `sigma_dot = B(sigma)·ω`.
///
/// `B = ¼[(1 − σᵀσ)I + 2S(σ) + 2σσᵀ]`, the form consistent with
/// `q_dot = ½ q ⊗ (0, ω)`.
pub fn mrp_kinematics_matrix(s: &AttitudeMRP) -> Matrix3<f64> {
    let sig = &s.sigma;
    let s2 = sig.norm_squared();
    (Matrix3::identity() * (1.0 - s2) + skew(sig) * 2.0 + sig * sig.transpose() * 2.0) * 0.25
}

pub fn mrp_rate(s: &AttitudeMRP, omega: &Vector3<f64>) -> Vector3<f64> {
    mrp_kinematics_matrix(s) * omega
}
