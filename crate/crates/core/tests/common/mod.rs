//! Independent oracles for the integration tests. Nothing here calls the
//! library's algebra: quaternions are plain `[f64; 4]` arrays (scalar first)
//! multiplied component by component.

#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

pub type Q = [f64; 4];
pub type DQ = [f64; 8];

pub fn qmul(a: &Q, b: &Q) -> Q {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn qconj(a: &Q) -> Q {
    [a[0], -a[1], -a[2], -a[3]]
}

pub fn qadd(a: &Q, b: &Q) -> Q {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn qscale(a: &Q, s: f64) -> Q {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn pure(v: &Vector3<f64>) -> Q {
    [0.0, v.x, v.y, v.z]
}

pub fn vec_of(q: &Q) -> Vector3<f64> {
    Vector3::new(q[1], q[2], q[3])
}

/// Rotation matrix of a unit quaternion with `R v = q v q*`, from the
/// classical direction-cosine formula.
pub fn rot(q: &Q) -> Matrix3<f64> {
    let [w, x, y, z] = *q;
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

/// `(a_r + ε a_d)(b_r + ε b_d) = a_r b_r + ε(a_r b_d + a_d b_r)`.
pub fn dqmul(a: &DQ, b: &DQ) -> DQ {
    let (ar, ad) = split(a);
    let (br, bd) = split(b);
    join(&qmul(&ar, &br), &qadd(&qmul(&ar, &bd), &qmul(&ad, &br)))
}

pub fn split(a: &DQ) -> (Q, Q) {
    ([a[0], a[1], a[2], a[3]], [a[4], a[5], a[6], a[7]])
}

pub fn join(r: &Q, d: &Q) -> DQ {
    [r[0], r[1], r[2], r[3], d[0], d[1], d[2], d[3]]
}

/// Pose `q + ε ½ r q`, translation in the parent frame.
pub fn pose(q: &Q, r: &Vector3<f64>) -> DQ {
    join(q, &qscale(&qmul(&pure(r), q), 0.5))
}

/// `ω + ε(v + ω × r_{C/T})` with `r_{C/T} = −r`.
pub fn dual_velocity(w: &Vector3<f64>, v: &Vector3<f64>, r: &Vector3<f64>) -> DQ {
    join(&pure(w), &pure(&(v - w.cross(r))))
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn unit_quaternion(rng: &mut impl Rng) -> Q {
    loop {
        let q = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-6 {
            return qscale(&q, 1.0 / n);
        }
    }
}

/// Uniform in the ball by rejection from the cube.
pub fn ball(rng: &mut impl Rng, radius: f64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v * radius;
        }
    }
}

/// Symmetric positive definite inertia whose principal moments obey the
/// triangle inequality.
pub fn inertia(rng: &mut impl Rng) -> Matrix3<f64> {
    let a: f64 = rng.random_range(1.0..10.0);
    let b: f64 = rng.random_range(1.0..10.0);
    let lo = (a - b).abs().max(0.1);
    let c = rng.random_range(lo..a + b);
    let r = rot(&unit_quaternion(rng));
    let j = r * Matrix3::from_diagonal(&Vector3::new(a, b, c)) * r.transpose();
    (j + j.transpose()) * 0.5
}

/// Central differences of `f: ℝ^n → ℝ^m`, column `j` for coordinate `j`.
pub fn central_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let m = f(x).len();
    let mut jac = vec![vec![0.0; x.len()]; m];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// One rigid body in the inertial frame: attitude `q` (body to inertial,
/// `v_I = q v_B q*`), inertial position and velocity, body angular rate.
#[derive(Debug, Clone, Copy)]
pub struct Body {
    pub q: Q,
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
    pub w: Vector3<f64>,
}

/// Newton–Euler with body-frame force and torque, classical RK4.
pub struct NewtonEuler {
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl NewtonEuler {
    fn rate(&self, b: &Body) -> Body {
        let j_inv = self.inertia.try_inverse().unwrap();
        Body {
            q: qscale(&qmul(&b.q, &pure(&b.w)), 0.5),
            r: b.v,
            v: rot(&b.q) * self.force / self.mass,
            w: j_inv * (self.torque - b.w.cross(&(self.inertia * b.w))),
        }
    }

    pub fn step(&self, b: &Body, dt: f64) -> Body {
        let add = |b: &Body, k: &Body, s: f64| Body {
            q: qadd(&b.q, &qscale(&k.q, s)),
            r: b.r + k.r * s,
            v: b.v + k.v * s,
            w: b.w + k.w * s,
        };
        let k1 = self.rate(b);
        let k2 = self.rate(&add(b, &k1, dt / 2.0));
        let k3 = self.rate(&add(b, &k2, dt / 2.0));
        let k4 = self.rate(&add(b, &k3, dt));
        let mut out = *b;
        for (k, s) in [(k1, 1.0), (k2, 2.0), (k3, 2.0), (k4, 1.0)] {
            out = add(&out, &k, s * dt / 6.0);
        }
        let n = out.q.iter().map(|c| c * c).sum::<f64>().sqrt();
        out.q = qscale(&out.q, 1.0 / n);
        out
    }
}

/// Relative state of `target` seen from `chaser`:
/// `(q_{T/C}, rᶜ, ωᶜ_{T/C}, vᶜ)` with `v` the rate of `rᶜ` in chaser
/// coordinates.
pub fn relative(target: &Body, chaser: &Body) -> (Q, Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let rc = rot(&chaser.q);
    let q = qmul(&qconj(&chaser.q), &target.q);
    let r = rc.transpose() * (target.r - chaser.r);
    let w = rot(&q) * target.w - chaser.w;
    let v = rc.transpose() * (target.v - chaser.v) - chaser.w.cross(&r);
    (q, r, w, v)
}
