//! Independent reference implementations used as test oracles. Nothing here
//! calls into the attitude code under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;
use rwctl::nn::DenseNet;

/// Scalar-first Hamilton product.
pub fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn qconj(q: [f64; 4]) -> [f64; 4] {
    [q[0], -q[1], -q[2], -q[3]]
}

pub fn qnormalize(q: [f64; 4]) -> [f64; 4] {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.map(|x| x / n)
}

/// Quaternion of an MRP, straight from the stereographic definition.
pub fn q_of_mrp(s: &Vector3<f64>) -> [f64; 4] {
    let s2 = s.norm_squared();
    let d = 1.0 + s2;
    [(1.0 - s2) / d, 2.0 * s.x / d, 2.0 * s.y / d, 2.0 * s.z / d]
}

/// Principal angle between two attitudes, robust near zero.
pub fn angle_between(a: [f64; 4], b: [f64; 4]) -> f64 {
    let d = qmul(qconj(a), b);
    let v = (d[1] * d[1] + d[2] * d[2] + d[3] * d[3]).sqrt();
    2.0 * v.atan2(d[0].abs())
}

/// Exact attitude after rotating at constant body rate `w` for `t` seconds.
pub fn q_constant_rate(q0: [f64; 4], w: &Vector3<f64>, t: f64) -> [f64; 4] {
    let n = w.norm();
    if n == 0.0 {
        return q0;
    }
    let h = 0.5 * n * t;
    let k = h.sin() / n;
    qmul(q0, [h.cos(), w.x * k, w.y * k, w.z * k])
}

/// Body-to-inertial rotation matrix of a unit quaternion.
pub fn rot(q: [f64; 4]) -> Matrix3<f64> {
    let [w, x, y, z] = q;
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

pub fn random_unit_quaternion<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            return qnormalize(q);
        }
    }
}

/// MRP of a quaternion taken on the short-rotation branch.
pub fn mrp_of_q(q: [f64; 4]) -> Vector3<f64> {
    let q = if q[0] < 0.0 { q.map(|x| -x) } else { q };
    Vector3::new(q[1], q[2], q[3]) / (1.0 + q[0])
}

/// Largest relative error between analytic and central-difference
/// parameter gradients of `Σ out_grad ∘ net(x)`.
pub fn gradient_check(net: &DenseNet, x: &DMatrix<f64>, out_grad: &DMatrix<f64>, h: f64) -> f64 {
    let cache = net.forward_batch(x).unwrap();
    let (g, _) = net.backward(&cache, out_grad).unwrap();
    let analytic: Vec<f64> = g
        .layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied().collect::<Vec<_>>())
        .collect();
    let objective = |n: &DenseNet| n.predict(x).unwrap().component_mul(out_grad).sum();
    let base = net.flat_params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_flat_params(&p).unwrap();
        let up = objective(&probe);
        p[i] = base[i] - h;
        probe.set_flat_params(&p).unwrap();
        let down = objective(&probe);
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let scale = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / scale);
    }
    worst
}
