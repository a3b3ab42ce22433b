//! Quaternion algebra.
//!
//! **Storage is scalar-first**: a quaternion is the ordered pair
//! `[scalar, vector]` and its 4-vector form is `[q0, q1, q2, q3]` with `q0`
//! the scalar. Many robotics libraries (ROS, Eigen's coefficient order) store
//! the scalar last; convert explicitly when exchanging data with them.
//!
//! Multiplication is the Hamilton product (`ij = k`). The left and right
//! multiplication matrices satisfy `a ⊗ b = left_mat(a)·b = right_mat(b)·a`,
//! which is what the Jacobian code elsewhere in the crate is built on.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::AlgebraError;

pub type Vec3 = Vector3<f64>;
pub type Vec4 = Vector4<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat4 = Matrix4<f64>;

/// Tolerance on `|‖q‖² − 1|` for a quaternion to count as unit.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Inputs with `|‖q‖² − 1|` up to this value are renormalized on
/// construction; anything further off is rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// Maximum scalar part tolerated on a quaternion that must be a pure vector.
pub const PURE_TOLERANCE: f64 = 1e-12;

/// A quaternion `[scalar, vector]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub scalar: f64,
    pub vector: Vec3,
}

impl Quaternion {
    pub const fn new(scalar: f64, x: f64, y: f64, z: f64) -> Self {
        Self {
            scalar,
            vector: Vector3::new(x, y, z),
        }
    }

    pub fn from_parts(scalar: f64, vector: Vec3) -> Self {
        Self { scalar, vector }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Vector quaternion `[0, v]`.
    pub fn pure(v: Vec3) -> Self {
        Self {
            scalar: 0.0,
            vector: v,
        }
    }

    /// Scalar-first 4-vector `[q0, q1, q2, q3]`.
    pub fn to_vector4(&self) -> Vec4 {
        Vector4::new(self.scalar, self.vector.x, self.vector.y, self.vector.z)
    }

    pub fn from_vector4(v: &Vec4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.scalar, self.vector.x, self.vector.y, self.vector.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.scalar.is_finite() && self.vector.iter().all(|c| c.is_finite())
    }

    pub fn is_pure(&self) -> bool {
        self.scalar.abs() <= PURE_TOLERANCE
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            scalar: s * self.scalar,
            vector: s * self.vector,
        }
    }

    /// Canonical sign for comparing rotations: nonnegative scalar part, and on
    /// a zero scalar the first nonzero vector component positive. Not used by
    /// any algebra in this crate, where the sign of `q` is significant.
    pub fn canonicalize(&self) -> Self {
        let first_nonzero = self
            .to_array()
            .into_iter()
            .find(|c| *c != 0.0)
            .unwrap_or(0.0);
        if first_nonzero < 0.0 {
            -*self
        } else {
            *self
        }
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            scalar: self.scalar + rhs.scalar,
            vector: self.vector + rhs.vector,
        }
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            scalar: self.scalar - rhs.scalar,
            vector: self.vector - rhs.vector,
        }
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion {
            scalar: -self.scalar,
            vector: -self.vector,
        }
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        qmul(&self, &rhs)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        rhs.scale(self)
    }
}

/// Hamilton product `[a0 b0 − a·b, a0 b + b0 a + a × b]`.
pub fn qmul(a: &Quaternion, b: &Quaternion) -> Quaternion {
    Quaternion {
        scalar: a.scalar * b.scalar - a.vector.dot(&b.vector),
        vector: a.scalar * b.vector + b.scalar * a.vector + a.vector.cross(&b.vector),
    }
}

pub fn qconj(a: &Quaternion) -> Quaternion {
    Quaternion {
        scalar: a.scalar,
        vector: -a.vector,
    }
}

/// Quaternion dot product; the result is the scalar quaternion
/// `[a0 b0 + a·b, 0]`.
pub fn qdot(a: &Quaternion, b: &Quaternion) -> Quaternion {
    Quaternion::new(a.scalar * b.scalar + a.vector.dot(&b.vector), 0.0, 0.0, 0.0)
}

/// Quaternion cross product `[0, a0 b + b0 a + a × b]`. For vector
/// quaternions this is the ordinary 3-vector cross product.
pub fn qcross(a: &Quaternion, b: &Quaternion) -> Quaternion {
    Quaternion::pure(a.scalar * b.vector + b.scalar * a.vector + a.vector.cross(&b.vector))
}

/// Squared norm, the scalar part of `a · a`.
pub fn qnorm2(a: &Quaternion) -> f64 {
    qdot(a, a).scalar
}

/// Skew-symmetric matrix with `skew(v)·w = v × w`.
pub fn skew(v: &Vec3) -> Mat3 {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Left multiplication matrix: `left_mat(a)·b = a ⊗ b`.
pub fn left_mat(q: &Quaternion) -> Mat4 {
    mult_mat(q, skew(&q.vector))
}

/// Right multiplication matrix: `right_mat(b)·a = a ⊗ b`.
pub fn right_mat(q: &Quaternion) -> Mat4 {
    mult_mat(q, -skew(&q.vector))
}

fn mult_mat(q: &Quaternion, lower_right: Mat3) -> Mat4 {
    let mut m = Mat4::identity() * q.scalar;
    let v = q.vector;
    for i in 0..3 {
        m[(0, i + 1)] -= v[i];
        m[(i + 1, 0)] += v[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] += lower_right[(i, j)];
        }
    }
    m
}

/// Conjugation matrix `diag(1, −1, −1, −1)`.
pub fn conj_mat() -> Mat4 {
    Mat4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// Jacobian of `a ⊗ b` with respect to `a`.
pub fn jac_mul_left(b: &Quaternion) -> Mat4 {
    right_mat(b)
}

/// Jacobian of `a ⊗ b` with respect to `b`.
pub fn jac_mul_right(a: &Quaternion) -> Mat4 {
    left_mat(a)
}

/// Gradient of `‖q‖²`.
pub fn grad_norm2(q: &Quaternion) -> Vec4 {
    2.0 * q.to_vector4()
}

/// Jacobian of the sandwich `a* ⊗ b ⊗ a` with respect to `a`.
pub fn jac_sandwich(a: &Quaternion, b: &Quaternion) -> Mat4 {
    left_mat(&qmul(&qconj(a), b)) + right_mat(&qmul(b, a)) * conj_mat()
}

/// A quaternion with `|‖q‖² − 1| ≤ UNIT_TOLERANCE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    /// Accepts `q` as-is when unit to `UNIT_TOLERANCE`, renormalizes it when
    /// within `RENORMALIZE_TOLERANCE`, and rejects it otherwise.
    pub fn new(q: Quaternion) -> Result<Self, AlgebraError> {
        if !q.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        let n2 = qnorm2(&q);
        let deviation = (n2 - 1.0).abs();
        if deviation <= UNIT_TOLERANCE {
            Ok(Self(q))
        } else if deviation <= RENORMALIZE_TOLERANCE {
            Ok(Self(q.scale(1.0 / n2.sqrt())))
        } else {
            Err(AlgebraError::NotUnit { norm2: n2 })
        }
    }

    /// Projects any nonzero finite quaternion onto the unit sphere.
    pub fn normalize(q: Quaternion) -> Result<Self, AlgebraError> {
        if !q.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        let n = qnorm2(&q).sqrt();
        if n == 0.0 {
            return Err(AlgebraError::NotUnit { norm2: 0.0 });
        }
        Ok(Self(q.scale(1.0 / n)))
    }

    /// Caller guarantees `q` is unit.
    pub fn new_unchecked(q: Quaternion) -> Self {
        Self(q)
    }

    pub fn identity() -> Self {
        Self(Quaternion::identity())
    }

    /// Rotation by `angle` radians about the unit `axis`:
    /// `[cos(φ/2), n sin(φ/2)]`.
    pub fn from_axis_angle(angle: f64, axis: &Vec3) -> Result<Self, AlgebraError> {
        let norm = axis.norm();
        if !norm.is_finite() || !angle.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(AlgebraError::NonUnitAxis { norm });
        }
        let half = 0.5 * angle;
        Ok(Self(Quaternion::from_parts(half.cos(), axis * half.sin())))
    }

    /// Rotation angle in `[0, π]`; both signs of the double cover give the
    /// same value.
    pub fn angle(&self) -> f64 {
        2.0 * self.0.vector.norm().atan2(self.0.scalar.abs())
    }

    /// Matrix `R` with `R v = q v q*`.
    pub fn to_rotation_matrix(&self) -> Mat3 {
        let (s, v) = (self.0.scalar, self.0.vector);
        Mat3::identity() * (s * s - v.dot(&v)) + 2.0 * v * v.transpose() + 2.0 * s * skew(&v)
    }

    pub fn quaternion(&self) -> &Quaternion {
        &self.0
    }

    pub fn into_inner(self) -> Quaternion {
        self.0
    }

    pub fn conj(&self) -> Self {
        Self(qconj(&self.0))
    }

    pub fn mul(&self, rhs: &UnitQuaternion) -> Self {
        Self(qmul(&self.0, &rhs.0))
    }
}

impl Deref for UnitQuaternion {
    type Target = Quaternion;
    fn deref(&self) -> &Quaternion {
        &self.0
    }
}

/// Active rotation `q ⊗ v ⊗ q*` of a vector quaternion; equals `R(q)·v` with
/// `R(q)` the usual rotation matrix of `q`. With `q = q_{x/y}` this maps
/// x-frame coordinates to y-frame coordinates.
pub fn rotate_vector(q: &UnitQuaternion, v: &Quaternion) -> Result<Quaternion, AlgebraError> {
    if !v.is_pure() {
        return Err(AlgebraError::NotPure { scalar: v.scalar });
    }
    let mut out = qmul(&qmul(q, v), &qconj(q));
    out.scalar = 0.0;
    Ok(out)
}

/// Inverse rotation `q* ⊗ v ⊗ q`. With `q = q_{y/x}` this is the change of
/// coordinates from frame x to frame y.
pub fn rotate_vector_inverse(
    q: &UnitQuaternion,
    v: &Quaternion,
) -> Result<Quaternion, AlgebraError> {
    rotate_vector(&q.conj(), v)
}

/// Attitude kinematics with body-frame angular velocity: `½ q ⊗ ω̂`.
pub fn qkin(q: &UnitQuaternion, omega_body: &Quaternion) -> Quaternion {
    qmul(q, omega_body).scale(0.5)
}

/// Attitude kinematics with parent-frame angular velocity: `½ ω̂ ⊗ q`.
pub fn qkin_parent(q: &UnitQuaternion, omega_parent: &Quaternion) -> Quaternion {
    qmul(omega_parent, q).scale(0.5)
}
