//! Dual-quaternion algebra, dual poses and dual velocities.
//!
//! A dual quaternion `â = a_r + ε a_d` (with `ε² = 0`) is stored as its real
//! and dual quaternion parts; its 8-vector form is `[a_r; a_d]`, each part
//! scalar-first.
//!
//! Frame conventions: `q̂_{x/y} = q_{x/y} + ε ½ r̂ʸ_{x/y} q_{x/y}` is the pose
//! of frame x relative to frame y, where `r̂ʸ_{x/y}` is the position of x
//! relative to y in y coordinates. The dual velocity
//! `ω̂ᶻ_{x/y} = ω̂ + ε(v̂ + ω̂ × r̂ᶻ_{z/x})` carries a position-dependent term in
//! its dual part, so converting to and from a plain `(ω, v)` twist always takes
//! the position explicitly.

use std::ops::{Add, Deref, Neg, Sub};

use nalgebra::{SMatrix, SVector};

use crate::error::AlgebraError;
use crate::quat::{
    conj_mat, left_mat, qconj, qcross, qdot, qmul, qnorm2, right_mat, Mat4, Quaternion,
    UnitQuaternion, Vec3, RENORMALIZE_TOLERANCE, UNIT_TOLERANCE,
};

pub type Vec8 = SVector<f64, 8>;
pub type Mat8 = SMatrix<f64, 8, 8>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualQuaternion {
    pub real: Quaternion,
    pub dual: Quaternion,
}

impl DualQuaternion {
    pub const fn new(real: Quaternion, dual: Quaternion) -> Self {
        Self { real, dual }
    }

    /// `1̂ = [1, 0] + ε[0, 0]`.
    pub const fn identity() -> Self {
        Self::new(Quaternion::identity(), Quaternion::zero())
    }

    pub const fn zero() -> Self {
        Self::new(Quaternion::zero(), Quaternion::zero())
    }

    /// Vector dual quaternion `[0, a] + ε[0, b]`.
    pub fn pure(real: Vec3, dual: Vec3) -> Self {
        Self::new(Quaternion::pure(real), Quaternion::pure(dual))
    }

    pub fn to_vector8(&self) -> Vec8 {
        let r = self.real.to_array();
        let d = self.dual.to_array();
        Vec8::from_column_slice(&[r[0], r[1], r[2], r[3], d[0], d[1], d[2], d[3]])
    }

    pub fn from_vector8(v: &Vec8) -> Self {
        Self::from_slice(v.as_slice())
    }

    /// Reads the first eight entries of `s` as `[real; dual]`.
    pub fn from_slice(s: &[f64]) -> Self {
        Self::new(
            Quaternion::new(s[0], s[1], s[2], s[3]),
            Quaternion::new(s[4], s[5], s[6], s[7]),
        )
    }

    pub fn to_array(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(&self.real.to_array());
        out[4..].copy_from_slice(&self.dual.to_array());
        out
    }

    pub fn is_finite(&self) -> bool {
        self.real.is_finite() && self.dual.is_finite()
    }

    pub fn is_pure(&self) -> bool {
        self.real.is_pure() && self.dual.is_pure()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.real.scale(s), self.dual.scale(s))
    }
}

impl Add for DualQuaternion {
    type Output = DualQuaternion;
    fn add(self, rhs: DualQuaternion) -> DualQuaternion {
        DualQuaternion::new(self.real + rhs.real, self.dual + rhs.dual)
    }
}

impl Sub for DualQuaternion {
    type Output = DualQuaternion;
    fn sub(self, rhs: DualQuaternion) -> DualQuaternion {
        DualQuaternion::new(self.real - rhs.real, self.dual - rhs.dual)
    }
}

impl Neg for DualQuaternion {
    type Output = DualQuaternion;
    fn neg(self) -> DualQuaternion {
        DualQuaternion::new(-self.real, -self.dual)
    }
}

/// `â b̂ = a_r b_r + ε(a_d b_r + a_r b_d)`.
pub fn dqmul(a: &DualQuaternion, b: &DualQuaternion) -> DualQuaternion {
    DualQuaternion::new(
        qmul(&a.real, &b.real),
        qmul(&a.dual, &b.real) + qmul(&a.real, &b.dual),
    )
}

pub fn dqconj(a: &DualQuaternion) -> DualQuaternion {
    DualQuaternion::new(qconj(&a.real), qconj(&a.dual))
}

/// Exchanges the real and dual parts.
pub fn dqswap(a: &DualQuaternion) -> DualQuaternion {
    DualQuaternion::new(a.dual, a.real)
}

/// Dual dot product `(a_r·b_r) + ε(a_d·b_r + a_r·b_d)`; both parts are
/// scalar quaternions.
pub fn dqdot(a: &DualQuaternion, b: &DualQuaternion) -> DualQuaternion {
    DualQuaternion::new(
        qdot(&a.real, &b.real),
        qdot(&a.dual, &b.real) + qdot(&a.real, &b.dual),
    )
}

/// Dual cross product `(a_r × b_r) + ε(a_d × b_r + a_r × b_d)`.
pub fn dqcross(a: &DualQuaternion, b: &DualQuaternion) -> DualQuaternion {
    DualQuaternion::new(
        qcross(&a.real, &b.real),
        qcross(&a.dual, &b.real) + qcross(&a.real, &b.dual),
    )
}

/// `‖â‖² = (a_r·a_r + a_d·a_d) + ε0`, the squared Euclidean norm of the
/// 8-vector. This is not the unit condition: a unit dual quaternion with a
/// nonzero translation `r` has `‖â‖² = 1 + ‖r‖²/4`; see [`dqdot`] for the
/// dual-valued `â·â = 1̂` check.
pub fn dqnorm2(a: &DualQuaternion) -> DualQuaternion {
    DualQuaternion::new(
        Quaternion::new(qnorm2(&a.real) + qnorm2(&a.dual), 0.0, 0.0, 0.0),
        Quaternion::zero(),
    )
}

/// `left_mat8(â)·b̂ = â b̂`; block lower triangular `[L(a_r) 0; L(a_d) L(a_r)]`.
pub fn left_mat8(a: &DualQuaternion) -> Mat8 {
    block_lower(&left_mat(&a.real), &left_mat(&a.dual))
}

/// `right_mat8(b̂)·â = â b̂`; block lower triangular `[R(b_r) 0; R(b_d) R(b_r)]`.
pub fn right_mat8(b: &DualQuaternion) -> Mat8 {
    block_lower(&right_mat(&b.real), &right_mat(&b.dual))
}

fn block_lower(diag: &Mat4, lower: &Mat4) -> Mat8 {
    let mut m = Mat8::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(diag);
    m.fixed_view_mut::<4, 4>(4, 0).copy_from(lower);
    m.fixed_view_mut::<4, 4>(4, 4).copy_from(diag);
    m
}

/// `blkdiag(I*, I*)`, the matrix form of [`dqconj`].
pub fn conj_mat8() -> Mat8 {
    let c = conj_mat();
    block_lower(&c, &Mat4::zeros())
}

/// Jacobian of `â* b̂ â` with respect to `â`.
pub fn jac_sandwich8(a: &DualQuaternion, b: &DualQuaternion) -> Mat8 {
    left_mat8(&dqmul(&dqconj(a), b)) + right_mat8(&dqmul(b, a)) * conj_mat8()
}

/// Gradient of `‖â‖²` (the real scalar of [`dqnorm2`]).
pub fn grad_dqnorm2(a: &DualQuaternion) -> Vec8 {
    2.0 * a.to_vector8()
}

/// Which frame the translation passed to [`UnitDualQuaternion::from_rotation_translation`]
/// is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationFrame {
    /// `r̂ʸ`, parent coordinates: `q + ε ½ r̂ʸ q`.
    Parent,
    /// `r̂ˣ`, child coordinates: `q + ε ½ q r̂ˣ`.
    Child,
}

/// A dual quaternion with unit real part and `real · dual = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDualQuaternion(DualQuaternion);

/// Dual poses are unit dual quaternions.
pub type DualPose = UnitDualQuaternion;

impl UnitDualQuaternion {
    /// Accepts `q̂` when unit to `UNIT_TOLERANCE`, projects it via
    /// [`Self::renormalize`] when within `RENORMALIZE_TOLERANCE`, and rejects
    /// it otherwise.
    pub fn new(q: DualQuaternion) -> Result<Self, AlgebraError> {
        if !q.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        let n2 = qnorm2(&q.real);
        let dot = qdot(&q.real, &q.dual).scalar;
        if (n2 - 1.0).abs() <= UNIT_TOLERANCE && dot.abs() <= UNIT_TOLERANCE {
            return Ok(Self(q));
        }
        if (n2 - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(AlgebraError::NotUnit { norm2: n2 });
        }
        if dot.abs() > RENORMALIZE_TOLERANCE {
            return Err(AlgebraError::NotOrthogonal { dot });
        }
        Self::renormalize(q)
    }

    /// Projection used after integration: scale the real part onto the unit
    /// sphere (the dual part by the same factor), then remove the component
    /// of the dual part along the real part.
    pub fn renormalize(q: DualQuaternion) -> Result<Self, AlgebraError> {
        if !q.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        let n = qnorm2(&q.real).sqrt();
        if n == 0.0 {
            return Err(AlgebraError::NotUnit { norm2: 0.0 });
        }
        let real = q.real.scale(1.0 / n);
        let dual = q.dual.scale(1.0 / n);
        let dual = dual - real.scale(qdot(&real, &dual).scalar);
        Ok(Self(DualQuaternion::new(real, dual)))
    }

    /// Caller guarantees the unit conditions hold.
    pub fn new_unchecked(q: DualQuaternion) -> Self {
        Self(q)
    }

    pub fn identity() -> Self {
        Self(DualQuaternion::identity())
    }

    /// Pose from orientation and translation.
    pub fn from_rotation_translation(
        q: &UnitQuaternion,
        r: &Vec3,
        frame: TranslationFrame,
    ) -> Self {
        let r_hat = Quaternion::pure(*r);
        let dual = match frame {
            TranslationFrame::Parent => qmul(&r_hat, q),
            TranslationFrame::Child => qmul(q, &r_hat),
        };
        Self(DualQuaternion::new(**q, dual.scale(0.5)))
    }

    pub fn rotation(&self) -> UnitQuaternion {
        UnitQuaternion::new_unchecked(self.0.real)
    }

    /// Translation in parent coordinates, `r̂ʸ = 2 q_d q_r*`.
    pub fn translation(&self) -> Vec3 {
        qmul(&self.0.dual, &qconj(&self.0.real)).vector * 2.0
    }

    /// Translation in child coordinates, `r̂ˣ = 2 q_r* q_d`.
    pub fn translation_child(&self) -> Vec3 {
        qmul(&qconj(&self.0.real), &self.0.dual).vector * 2.0
    }

    /// `(q, rʸ)`, the inverse of `from_rotation_translation(.., Parent)`.
    pub fn to_parts(&self) -> (UnitQuaternion, Vec3) {
        (self.rotation(), self.translation())
    }

    pub fn dual_quaternion(&self) -> &DualQuaternion {
        &self.0
    }

    pub fn into_inner(self) -> DualQuaternion {
        self.0
    }

    /// Inverse pose; `q̂_{x/y}* = q̂_{y/x}`.
    pub fn conj(&self) -> Self {
        Self(dqconj(&self.0))
    }

    pub fn mul(&self, rhs: &UnitDualQuaternion) -> Self {
        Self(dqmul(&self.0, &rhs.0))
    }
}

impl Deref for UnitDualQuaternion {
    type Target = DualQuaternion;
    fn deref(&self) -> &DualQuaternion {
        &self.0
    }
}

/// `pose_to_parts` with the pose given as a raw dual quaternion; validates
/// the unit conditions first.
pub fn pose_to_parts(p: &DualQuaternion) -> Result<(UnitQuaternion, Vec3), AlgebraError> {
    Ok(UnitDualQuaternion::new(*p)?.to_parts())
}

/// Vector dual quaternion `ω̂ + ε(v̂ + ω̂ × r̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualVelocity(DualQuaternion);

impl DualVelocity {
    pub fn new(w: DualQuaternion) -> Result<Self, AlgebraError> {
        if !w.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        if !w.real.is_pure() {
            return Err(AlgebraError::NotPure {
                scalar: w.real.scalar,
            });
        }
        if !w.dual.is_pure() {
            return Err(AlgebraError::NotPure {
                scalar: w.dual.scalar,
            });
        }
        let mut w = w;
        w.real.scalar = 0.0;
        w.dual.scalar = 0.0;
        Ok(Self(w))
    }

    pub fn zero() -> Self {
        Self(DualQuaternion::zero())
    }

    /// `r` is the position of the coordinate frame relative to the moving
    /// frame (`rᶻ_{z/x}` for `ω̂ᶻ_{x/y}`).
    pub fn from_twist(omega: &Vec3, v: &Vec3, r: &Vec3) -> Self {
        Self(DualQuaternion::pure(*omega, v + omega.cross(r)))
    }

    /// Inverse of [`Self::from_twist`] for the same `r`.
    pub fn to_twist(&self, r: &Vec3) -> (Vec3, Vec3) {
        let omega = self.0.real.vector;
        (omega, self.0.dual.vector - omega.cross(r))
    }

    pub fn omega(&self) -> Vec3 {
        self.0.real.vector
    }

    pub fn dual_quaternion(&self) -> &DualQuaternion {
        &self.0
    }

    pub fn into_inner(self) -> DualQuaternion {
        self.0
    }
}

impl Deref for DualVelocity {
    type Target = DualQuaternion;
    fn deref(&self) -> &DualQuaternion {
        &self.0
    }
}

/// Change of coordinates `ω̂ʸ = q̂*_{y/x} ω̂ˣ q̂_{y/x}` with `pose = q̂_{y/x}`.
pub fn frame_transform(
    pose: &DualPose,
    w: &DualQuaternion,
) -> Result<DualQuaternion, AlgebraError> {
    if !w.is_pure() {
        return Err(AlgebraError::NotPure {
            scalar: w.real.scalar.abs().max(w.dual.scalar.abs()),
        });
    }
    Ok(sandwich_conj_first(pose, w))
}

/// Inverse change of coordinates `ω̂ˣ = q̂_{y/x} ω̂ʸ q̂*_{y/x}`.
pub fn frame_transform_inverse(
    pose: &DualPose,
    w: &DualQuaternion,
) -> Result<DualQuaternion, AlgebraError> {
    frame_transform(&pose.conj(), w)
}

/// `p* w p` without any validation.
pub(crate) fn sandwich_conj_first(p: &DualQuaternion, w: &DualQuaternion) -> DualQuaternion {
    dqmul(&dqmul(&dqconj(p), w), p)
}

/// `p w p*` without any validation.
pub(crate) fn sandwich_conj_last(p: &DualQuaternion, w: &DualQuaternion) -> DualQuaternion {
    dqmul(&dqmul(p, w), &dqconj(p))
}

/// Pose kinematics with child-frame dual velocity: `½ q̂ ω̂ˣ`.
pub fn dqkin(pose: &DualPose, w_child: &DualVelocity) -> DualQuaternion {
    dqmul(pose, w_child).scale(0.5)
}

/// Pose kinematics with parent-frame dual velocity: `½ ω̂ʸ q̂`.
pub fn dqkin_parent(pose: &DualPose, w_parent: &DualVelocity) -> DualQuaternion {
    dqmul(w_parent, pose).scale(0.5)
}
