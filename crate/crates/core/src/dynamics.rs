//! Rigid-body and relative dual-quaternion dynamics.
//!
//! The relative state is `x = [q̂_{T/C}; ω̂ᶜ_{T/C}]`, the pose and dual velocity
//! of the target frame T with respect to the chaser (camera) frame C, in C
//! coordinates. As a raw 16-vector it is laid out
//! `[pose.real, pose.dual, vel.real, vel.dual]`, each quaternion scalar-first.
//!
//! Raw rate functions (`*_raw`) take unvalidated vectors: Runge–Kutta stages
//! and ambient-space perturbations are not exactly unit, and the model is
//! polynomial in the state so it is defined everywhere.

use nalgebra::{Cholesky, SVector};

use crate::dualquat::{
    dqcross, dqkin, dqmul, dqswap, sandwich_conj_first, sandwich_conj_last, DualPose,
    DualQuaternion, DualVelocity, TranslationFrame, UnitDualQuaternion,
};
use crate::error::{AlgebraError, ModelError};
use crate::quat::{Mat3, Quaternion, UnitQuaternion, Vec3};

pub type Vec16 = SVector<f64, 16>;
/// Relative state plus the chaser's own inertial dual velocity.
pub type Vec24 = SVector<f64, 24>;

/// Default integration step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;

/// `M = blkdiag(1, m I₃, 1, Ī)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    mass: f64,
    inertia: Mat3,
    inertia_inv: Mat3,
}

impl MassMatrix {
    pub fn new(mass: f64, inertia: Mat3) -> Result<Self, ModelError> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ModelError::InvalidMass(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if inertia.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::InvalidMass("inertia has non-finite entries".into()));
        }
        let asym = (inertia - inertia.transpose()).amax();
        if asym > 1e-12 {
            return Err(ModelError::InvalidMass(format!(
                "inertia is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let chol = Cholesky::new(inertia).ok_or_else(|| {
            ModelError::InvalidMass("inertia is not positive definite".into())
        })?;
        let eig = inertia.symmetric_eigenvalues();
        let (a, b, c) = (eig[0], eig[1], eig[2]);
        if a + b < c || a + c < b || b + c < a {
            log::warn!(
                "principal inertias {a}, {b}, {c} violate the triangle inequality; \
                 no physical body has these"
            );
        }
        Ok(Self {
            mass,
            inertia,
            inertia_inv: chol.inverse(),
        })
    }

    pub fn identity() -> Self {
        Self {
            mass: 1.0,
            inertia: Mat3::identity(),
            inertia_inv: Mat3::identity(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }

    /// Blockwise scaling of a vector dual quaternion.
    pub fn apply(&self, w: &DualQuaternion) -> Result<DualQuaternion, AlgebraError> {
        check_pure(w)?;
        Ok(self.apply_raw(w))
    }

    pub fn apply_inverse(&self, w: &DualQuaternion) -> Result<DualQuaternion, AlgebraError> {
        check_pure(w)?;
        Ok(self.apply_inverse_raw(w))
    }

    pub(crate) fn apply_raw(&self, w: &DualQuaternion) -> DualQuaternion {
        DualQuaternion::new(
            Quaternion::from_parts(w.real.scalar, self.mass * w.real.vector),
            Quaternion::from_parts(w.dual.scalar, self.inertia * w.dual.vector),
        )
    }

    pub(crate) fn apply_inverse_raw(&self, w: &DualQuaternion) -> DualQuaternion {
        DualQuaternion::new(
            Quaternion::from_parts(w.real.scalar, w.real.vector / self.mass),
            Quaternion::from_parts(w.dual.scalar, self.inertia_inv * w.dual.vector),
        )
    }

    /// `½ ωᵀ Ī ω`.
    pub fn rotational_energy(&self, omega: &Vec3) -> f64 {
        0.5 * omega.dot(&(self.inertia * omega))
    }
}

fn check_pure(w: &DualQuaternion) -> Result<(), AlgebraError> {
    if w.is_pure() {
        Ok(())
    } else {
        Err(AlgebraError::NotPure {
            scalar: w.real.scalar.abs().max(w.dual.scalar.abs()),
        })
    }
}

/// Net external force and torque in body coordinates, `f̂ = f̂ + ε τ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualForce {
    pub force: Vec3,
    pub torque: Vec3,
}

impl DualForce {
    pub fn new(force: Vec3, torque: Vec3) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.force == Vec3::zeros() && self.torque == Vec3::zeros()
    }

    pub fn to_dual_quaternion(&self) -> DualQuaternion {
        DualQuaternion::pure(self.force, self.torque)
    }
}

/// Body-frame wrench as a function of time.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WrenchModel {
    #[default]
    Zero,
    Constant(DualForce),
    /// Linear interpolation between `(t, wrench)` samples with strictly
    /// increasing times, held constant outside the table.
    Tabulated(Vec<(f64, DualForce)>),
}

impl WrenchModel {
    pub fn at(&self, t: f64) -> DualForce {
        match self {
            WrenchModel::Zero => DualForce::zero(),
            WrenchModel::Constant(f) => *f,
            WrenchModel::Tabulated(table) => interpolate(table, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            WrenchModel::Zero => true,
            WrenchModel::Constant(f) => f.is_zero(),
            WrenchModel::Tabulated(table) => table.iter().all(|(_, f)| f.is_zero()),
        }
    }
}

fn interpolate(table: &[(f64, DualForce)], t: f64) -> DualForce {
    let Some(first) = table.first() else {
        return DualForce::zero();
    };
    if t <= first.0 {
        return first.1;
    }
    // table.last() exists since first does
    let last = table[table.len() - 1];
    if t >= last.0 {
        return last.1;
    }
    let idx = table.partition_point(|(ti, _)| *ti <= t);
    let (t0, f0) = table[idx - 1];
    let (t1, f1) = table[idx];
    let s = (t - t0) / (t1 - t0);
    DualForce::new(
        f0.force + s * (f1.force - f0.force),
        f0.torque + s * (f1.torque - f0.torque),
    )
}

/// `swap(M⁻¹(f̂ − ω̂ × M swap(ω̂)))`, the rate of a body's own dual velocity
/// expressed in its own frame.
pub fn inertial_acceleration(
    mass: &MassMatrix,
    force: &DualForce,
    omega: &DualQuaternion,
) -> DualQuaternion {
    let momentum = mass.apply_raw(&dqswap(omega));
    let net = force.to_dual_quaternion() - dqcross(omega, &momentum);
    dqswap(&mass.apply_inverse_raw(&net))
}

/// Pose and dual velocity of a body with respect to the inertial frame,
/// velocity in body coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialBodyState {
    pub pose: DualPose,
    pub velocity: DualVelocity,
}

/// `(q̂̇, ω̂̇)` for a single body in the inertial frame.
pub fn inertial_dynamics(
    s: &InertialBodyState,
    mass: &MassMatrix,
    force: &DualForce,
) -> (DualQuaternion, DualQuaternion) {
    (
        dqkin(&s.pose, &s.velocity),
        inertial_acceleration(mass, force, &s.velocity),
    )
}

/// Dual transport theorem:
/// `ω̂̇ᶜ_{T/I} = q̂_{T/C} ω̂̇ᵀ_{T/I} q̂*_{T/C} + ω̂ᶜ_{T/C} × ω̂ᶜ_{T/I}`.
pub fn transport_theorem(
    pose: &DualPose,
    w_rel: &DualVelocity,
    w_ti_t_rate: &DualQuaternion,
    w_ti_c: &DualVelocity,
) -> DualQuaternion {
    transport_raw(pose, w_rel, w_ti_t_rate, w_ti_c)
}

fn transport_raw(
    pose: &DualQuaternion,
    w_rel: &DualQuaternion,
    w_ti_t_rate: &DualQuaternion,
    w_ti_c: &DualQuaternion,
) -> DualQuaternion {
    sandwich_conj_last(pose, w_ti_t_rate) + dqcross(w_rel, w_ti_c)
}

/// State rate on raw components. `w_ci_c` is the chaser's inertial dual
/// velocity in its own frame.
pub fn relative_rate_raw(
    x: &Vec16,
    target: (&MassMatrix, &DualForce),
    chaser: (&MassMatrix, &DualForce),
    w_ci_c: &DualQuaternion,
) -> Vec16 {
    let pose = DualQuaternion::from_slice(&x.as_slice()[..8]);
    let w_rel = DualQuaternion::from_slice(&x.as_slice()[8..]);

    let w_ti_c = w_rel + *w_ci_c;
    let w_ti_t = sandwich_conj_first(&pose, &w_ti_c);
    let w_ti_t_rate = inertial_acceleration(target.0, target.1, &w_ti_t);
    let w_ci_c_rate = inertial_acceleration(chaser.0, chaser.1, w_ci_c);

    let pose_rate = dqmul(&w_rel, &pose).scale(0.5);
    let vel_rate = transport_raw(&pose, &w_rel, &w_ti_t_rate, &w_ti_c) - w_ci_c_rate;
    stack16(&pose_rate, &vel_rate)
}

/// Relative equations of motion: `q̂̇ = ½ ω̂ᶜ_{T/C} q̂` and the dual velocity
/// rate from the transport theorem minus the chaser's own acceleration.
pub fn relative_dynamics(
    x: &RelativeState,
    target: (&MassMatrix, &DualForce),
    chaser: (&MassMatrix, &DualForce),
    w_ci_c: &DualVelocity,
) -> Vec16 {
    relative_rate_raw(&x.to_vector16(), target, chaser, w_ci_c)
}

/// Kinematics with the dual velocity held constant; the velocity rows of the
/// rate are zero.
pub fn kinematics_rate_raw(x: &Vec16) -> Vec16 {
    let pose = DualQuaternion::from_slice(&x.as_slice()[..8]);
    let w_rel = DualQuaternion::from_slice(&x.as_slice()[8..]);
    stack16(&dqmul(&w_rel, &pose).scale(0.5), &DualQuaternion::zero())
}

pub(crate) fn stack16(a: &DualQuaternion, b: &DualQuaternion) -> Vec16 {
    let mut out = Vec16::zeros();
    out.as_mut_slice()[..8].copy_from_slice(&a.to_array());
    out.as_mut_slice()[8..].copy_from_slice(&b.to_array());
    out
}

/// The 16-component relative state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState {
    pub pose: DualPose,
    pub velocity: DualVelocity,
}

impl RelativeState {
    pub fn new(pose: DualPose, velocity: DualVelocity) -> Self {
        Self { pose, velocity }
    }

    pub fn identity() -> Self {
        Self::new(DualPose::identity(), DualVelocity::zero())
    }

    pub fn to_vector16(&self) -> Vec16 {
        stack16(&self.pose, &self.velocity)
    }

    /// Validates both parts; the pose goes through the unit-dual-quaternion
    /// acceptance policy.
    pub fn from_vector16(x: &Vec16) -> Result<Self, AlgebraError> {
        Ok(Self {
            pose: UnitDualQuaternion::new(DualQuaternion::from_slice(&x.as_slice()[..8]))?,
            velocity: DualVelocity::new(DualQuaternion::from_slice(&x.as_slice()[8..]))?,
        })
    }

    /// Re-projects the pose onto the unit dual quaternions and drops the
    /// velocity scalar slots. Used after each integration step.
    pub fn project(x: &Vec16) -> Result<Self, AlgebraError> {
        let pose = UnitDualQuaternion::renormalize(DualQuaternion::from_slice(&x.as_slice()[..8]))?;
        let mut vel = DualQuaternion::from_slice(&x.as_slice()[8..]);
        if !vel.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        vel.real.scalar = 0.0;
        vel.dual.scalar = 0.0;
        Ok(Self {
            pose,
            velocity: DualVelocity::new(vel)?,
        })
    }
}

/// `ξ = (q_{T/C}, rᶜ_{T/C}, ωᶜ_{T/C}, vᶜ_{T/C})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub q: UnitQuaternion,
    pub r: Vec3,
    pub omega: Vec3,
    pub v: Vec3,
}

impl ReducedState {
    pub fn identity() -> Self {
        Self {
            q: UnitQuaternion::identity(),
            r: Vec3::zeros(),
            omega: Vec3::zeros(),
            v: Vec3::zeros(),
        }
    }

    /// `[q0..q3, r, ω, v]`.
    pub fn to_array(&self) -> [f64; 13] {
        let mut out = [0.0; 13];
        out[..4].copy_from_slice(&self.q.to_array());
        out[4..7].copy_from_slice(self.r.as_slice());
        out[7..10].copy_from_slice(self.omega.as_slice());
        out[10..].copy_from_slice(self.v.as_slice());
        out
    }
}

/// `x = g(ξ)`. The dual velocity uses `rᶜ_{C/T} = −rᶜ_{T/C}`.
pub fn state_embed(xi: &ReducedState) -> RelativeState {
    let pose = DualPose::from_rotation_translation(&xi.q, &xi.r, TranslationFrame::Parent);
    let velocity = DualVelocity::from_twist(&xi.omega, &xi.v, &(-xi.r));
    RelativeState::new(pose, velocity)
}

/// `ξ = g⁻¹(x)`.
pub fn state_reduce(x: &RelativeState) -> ReducedState {
    let (q, r) = x.pose.to_parts();
    let (omega, v) = x.velocity.to_twist(&(-r));
    ReducedState { q, r, omega, v }
}

/// One classical fourth-order Runge–Kutta step on raw components.
pub fn rk4<const N: usize>(
    t: f64,
    x: &SVector<f64, N>,
    dt: f64,
    rate: impl Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
) -> SVector<f64, N> {
    let half = 0.5 * dt;
    let k1 = rate(t, x);
    let k2 = rate(t + half, &(x + k1 * half));
    let k3 = rate(t + half, &(x + k2 * half));
    let k4 = rate(t + dt, &(x + k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// RK4 step of a relative state followed by unit-dual-quaternion
/// re-projection.
pub fn rk4_step(
    x: &RelativeState,
    t: f64,
    dt: f64,
    rate: impl Fn(f64, &Vec16) -> Vec16,
) -> Result<RelativeState, ModelError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ModelError::InvalidStep(dt));
    }
    let next = rk4(t, &x.to_vector16(), dt, rate);
    if next.iter().any(|c| !c.is_finite()) {
        return Err(ModelError::Divergence { last_good_time: t });
    }
    RelativeState::project(&next).map_err(|_| ModelError::Divergence { last_good_time: t })
}

/// How the chaser moves with respect to the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ChaserMotion {
    /// Inertially fixed: `ω̂_{C/I} = 0` at all times.
    #[default]
    Fixed,
    /// Free rigid body under its wrench model, starting from this dual
    /// velocity (chaser frame, `ω + ε v`).
    Propagated(DualVelocity),
}

/// Target and chaser physical models driving the relative state.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSystem {
    pub target_mass: MassMatrix,
    pub target_wrench: WrenchModel,
    pub chaser_mass: MassMatrix,
    pub chaser_wrench: WrenchModel,
    pub chaser_motion: ChaserMotion,
}

impl Default for RelativeSystem {
    fn default() -> Self {
        Self {
            target_mass: MassMatrix::identity(),
            target_wrench: WrenchModel::Zero,
            chaser_mass: MassMatrix::identity(),
            chaser_wrench: WrenchModel::Zero,
            chaser_motion: ChaserMotion::Fixed,
        }
    }
}

/// One propagated sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: RelativeState,
    pub chaser_velocity: DualVelocity,
}

impl RelativeSystem {
    fn chaser_is_fixed(&self) -> bool {
        matches!(self.chaser_motion, ChaserMotion::Fixed)
    }

    pub fn initial_chaser_velocity(&self) -> DualVelocity {
        match self.chaser_motion {
            ChaserMotion::Fixed => DualVelocity::zero(),
            ChaserMotion::Propagated(w) => w,
        }
    }

    /// Rate of the augmented state `[x; ω̂ᶜ_{C/I}]`.
    pub fn augmented_rate(&self, t: f64, z: &Vec24) -> Vec24 {
        let x = Vec16::from_column_slice(&z.as_slice()[..16]);
        let w_ci = DualQuaternion::from_slice(&z.as_slice()[16..]);
        let target_force = self.target_wrench.at(t);
        let chaser_force = if self.chaser_is_fixed() {
            DualForce::zero()
        } else {
            self.chaser_wrench.at(t)
        };
        let xdot = relative_rate_raw(
            &x,
            (&self.target_mass, &target_force),
            (&self.chaser_mass, &chaser_force),
            &w_ci,
        );
        let mut out = Vec24::zeros();
        out.as_mut_slice()[..16].copy_from_slice(xdot.as_slice());
        if !self.chaser_is_fixed() {
            let wdot = inertial_acceleration(&self.chaser_mass, &chaser_force, &w_ci);
            out.as_mut_slice()[16..].copy_from_slice(&wdot.to_array());
        }
        out
    }

    /// Rate of the relative state alone given the chaser velocity at `t`.
    pub fn rate(&self, t: f64, x: &Vec16, w_ci_c: &DualQuaternion) -> Vec16 {
        let mut z = Vec24::zeros();
        z.as_mut_slice()[..16].copy_from_slice(x.as_slice());
        z.as_mut_slice()[16..].copy_from_slice(&w_ci_c.to_array());
        Vec16::from_column_slice(&self.augmented_rate(t, &z).as_slice()[..16])
    }

    /// Fixed-step propagation from `x0` at `t = 0`, re-projecting the pose
    /// after every step. Returns `steps + 1` samples including the initial
    /// one.
    pub fn propagate(
        &self,
        x0: &RelativeState,
        dt: f64,
        steps: usize,
    ) -> Result<Vec<Sample>, ModelError> {
        let mut out = Vec::with_capacity(steps + 1);
        self.propagate_with(x0, dt, steps, |s| out.push(*s))?;
        Ok(out)
    }

    /// As [`Self::propagate`] but hands each sample to `visit` instead of
    /// collecting them.
    pub fn propagate_with(
        &self,
        x0: &RelativeState,
        dt: f64,
        steps: usize,
        mut visit: impl FnMut(&Sample),
    ) -> Result<(), ModelError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ModelError::InvalidStep(dt));
        }
        let mut sample = Sample {
            t: 0.0,
            state: *x0,
            chaser_velocity: self.initial_chaser_velocity(),
        };
        visit(&sample);
        for k in 0..steps {
            let z = augment(&sample.state.to_vector16(), &sample.chaser_velocity);
            let next = rk4(sample.t, &z, dt, |t, z| self.augmented_rate(t, z));
            let diverged = || ModelError::Divergence {
                last_good_time: sample.t,
            };
            if next.iter().any(|c| !c.is_finite()) {
                return Err(diverged());
            }
            let state = RelativeState::project(&Vec16::from_column_slice(&next.as_slice()[..16]))
                .map_err(|_| diverged())?;
            let chaser_velocity =
                DualVelocity::new(DualQuaternion::from_slice(&next.as_slice()[16..]))
                    .map_err(|_| diverged())?;
            sample = Sample {
                t: (k + 1) as f64 * dt,
                state,
                chaser_velocity,
            };
            visit(&sample);
        }
        Ok(())
    }

    /// Propagation in the ambient 16-space with no re-projection, for
    /// perturbation studies. Calls `visit(t, x)` at every step including the
    /// initial state.
    pub fn propagate_ambient(
        &self,
        x0: &Vec16,
        dt: f64,
        steps: usize,
        mut visit: impl FnMut(f64, &Vec16),
    ) -> Result<(), ModelError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ModelError::InvalidStep(dt));
        }
        let mut z = augment(x0, &self.initial_chaser_velocity());
        visit(0.0, x0);
        for k in 0..steps {
            let t = k as f64 * dt;
            z = rk4(t, &z, dt, |t, z| self.augmented_rate(t, z));
            if z.iter().any(|c| !c.is_finite()) {
                return Err(ModelError::Divergence { last_good_time: t });
            }
            visit(
                (k + 1) as f64 * dt,
                &Vec16::from_column_slice(&z.as_slice()[..16]),
            );
        }
        Ok(())
    }
}

fn augment(x: &Vec16, w_ci: &DualQuaternion) -> Vec24 {
    let mut z = Vec24::zeros();
    z.as_mut_slice()[..16].copy_from_slice(x.as_slice());
    z.as_mut_slice()[16..].copy_from_slice(&w_ci.to_array());
    z
}
