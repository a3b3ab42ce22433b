//! Lie derivatives of the marker measurement and their Jacobians.
//!
//! `L⁰ = h(x) = q̂_{T/C} q̂_{M/T}` and `L¹ = ∇L⁰ f(x) = ½ ω̂ᶜ_{T/C} q̂_{T/C} q̂_{M/T}`.
//! Only the kinematic rows of `f` reach `L¹` because the velocity block of
//! `∇L⁰` is zero, which is why no mass or wrench parameter appears anywhere
//! in this module.
//!
//! All Jacobians are with respect to the ambient 16-vector
//! `[q̂_{T/C}; ω̂ᶜ_{T/C}]`, not a tangent space of the unit constraint.

use nalgebra::{DMatrix, DVector, SMatrix};

use crate::dualquat::{dqmul, left_mat8, right_mat8, DualQuaternion, Mat8, Vec8};
use crate::dynamics::{RelativeState, Vec16};
use crate::measurement::{measure_raw, MarkerConfig};
use crate::numeric::{central_jacobian, central_jacobian_dyn};

pub type Mat8x16 = SMatrix<f64, 8, 16>;
pub type Mat16 = SMatrix<f64, 16, 16>;

fn split(x: &Vec16) -> (DualQuaternion, DualQuaternion) {
    (
        DualQuaternion::from_slice(&x.as_slice()[..8]),
        DualQuaternion::from_slice(&x.as_slice()[8..]),
    )
}

fn hstack(left: &Mat8, right: &Mat8) -> Mat8x16 {
    let mut m = Mat8x16::zeros();
    m.fixed_view_mut::<8, 8>(0, 0).copy_from(left);
    m.fixed_view_mut::<8, 8>(0, 8).copy_from(right);
    m
}

pub fn lie0(x: &RelativeState, marker: &MarkerConfig) -> DualQuaternion {
    lie0_raw(&x.to_vector16(), &marker.pose_in_target)
}

pub fn lie0_raw(x: &Vec16, marker: &DualQuaternion) -> DualQuaternion {
    let (pose, _) = split(x);
    measure_raw(&pose, marker)
}

/// `∇L⁰ = [⟦q̂_{M/T}⟧_R  0₈ₓ₈]`, independent of the state.
pub fn grad_lie0(marker: &MarkerConfig) -> Mat8x16 {
    hstack(&right_mat8(&marker.pose_in_target), &Mat8::zeros())
}

pub fn lie1(x: &RelativeState, marker: &MarkerConfig) -> DualQuaternion {
    lie1_raw(&x.to_vector16(), &marker.pose_in_target)
}

pub fn lie1_raw(x: &Vec16, marker: &DualQuaternion) -> DualQuaternion {
    let (pose, vel) = split(x);
    dqmul(&dqmul(&vel, &pose), marker).scale(0.5)
}

/// `∇L¹ = [½ ⟦ω̂⟧_L ⟦q̂_{M/T}⟧_R   ½ ⟦q̂_{T/C} q̂_{M/T}⟧_R]`.
pub fn grad_lie1(x: &RelativeState, marker: &MarkerConfig) -> Mat8x16 {
    grad_lie1_raw(&x.to_vector16(), &marker.pose_in_target)
}

pub fn grad_lie1_raw(x: &Vec16, marker: &DualQuaternion) -> Mat8x16 {
    let (pose, vel) = split(x);
    let left = left_mat8(&vel) * right_mat8(marker) * 0.5;
    let right = right_mat8(&dqmul(&pose, marker)) * 0.5;
    hstack(&left, &right)
}

/// The stacked 16×16 matrix `[∇L⁰; ∇L¹]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityMatrix {
    pub entries: Mat16,
}

impl ObservabilityMatrix {
    pub fn from_rows(grad0: &Mat8x16, grad1: &Mat8x16) -> Self {
        let mut entries = Mat16::zeros();
        entries.fixed_view_mut::<8, 16>(0, 0).copy_from(grad0);
        entries.fixed_view_mut::<8, 16>(8, 0).copy_from(grad1);
        Self { entries }
    }

    /// Block `(i, j)` with `i, j ∈ {1, 2}`; `(1, 2)` is the structural zero.
    pub fn block(&self, i: usize, j: usize) -> Mat8 {
        assert!((1..=2).contains(&i) && (1..=2).contains(&j), "block index out of range");
        self.entries
            .fixed_view::<8, 8>(8 * (i - 1), 8 * (j - 1))
            .into_owned()
    }

    /// True when every entry of block (1, 2) is `+0.0` or `-0.0`.
    pub fn upper_right_is_zero(&self) -> bool {
        self.block(1, 2).iter().all(|c| *c == 0.0)
    }
}

pub fn build_observability_matrix(x: &RelativeState, marker: &MarkerConfig) -> ObservabilityMatrix {
    ObservabilityMatrix::from_rows(&grad_lie0(marker), &grad_lie1(x, marker))
}

/// Max absolute differences `(‖∇L⁰ − FD(L⁰)‖∞, ‖∇L¹ − FD(L¹)‖∞)` at `x`,
/// with central differences in the ambient 16-space.
pub fn fd_residuals(x: &RelativeState, marker: &MarkerConfig, step: f64) -> (f64, f64) {
    let xv = x.to_vector16();
    let m = marker.pose_in_target;
    let fd0 = central_jacobian(|x: &Vec16| lie0_raw(x, &m).to_vector8(), &xv, step);
    let fd1 = central_jacobian(|x: &Vec16| lie1_raw(x, &m).to_vector8(), &xv, step);
    (
        (grad_lie0(marker) - fd0).amax(),
        (grad_lie1(x, marker) - fd1).amax(),
    )
}

/// A motion vector field on the raw 16-vector state.
pub type VectorField<'a> = dyn Fn(&Vec16) -> Vec16 + Sync + 'a;

/// A user-supplied higher-order Lie derivative, evaluated on the raw state.
pub type LieDerivativeFn<'a> = Box<dyn Fn(&Vec16) -> DVector<f64> + Sync + 'a>;

/// Assembles an observability matrix for an arbitrary vector field: `∇L⁰`
/// analytically, `L¹ = ∇L⁰ f(x)` evaluated from the field, and `∇L¹` plus
/// any extra Lie derivatives by central differences. Extra rows are appended
/// below `∇L¹` in the order added.
pub struct ObservabilityBuilder<'a> {
    marker: MarkerConfig,
    field: &'a VectorField<'a>,
    step: f64,
    extra: Vec<LieDerivativeFn<'a>>,
}

impl<'a> ObservabilityBuilder<'a> {
    pub fn new(marker: MarkerConfig, field: &'a VectorField<'a>) -> Self {
        Self {
            marker,
            field,
            step: crate::numeric::FD_STEP,
            extra: Vec::new(),
        }
    }

    pub fn step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_lie_derivative(mut self, lie: LieDerivativeFn<'a>) -> Self {
        self.extra.push(lie);
        self
    }

    /// `L¹(x) = ∇L⁰ · f(x)`.
    pub fn lie1(&self, x: &Vec16) -> Vec8 {
        grad_lie0(&self.marker) * (self.field)(x)
    }

    pub fn build(&self, x: &RelativeState) -> DMatrix<f64> {
        let xv = x.to_vector16();
        let grad0 = grad_lie0(&self.marker);
        let grad1 = central_jacobian(|x: &Vec16| self.lie1(x), &xv, self.step);
        let mut rows: Vec<DMatrix<f64>> = vec![
            DMatrix::from_column_slice(8, 16, grad0.as_slice()),
            DMatrix::from_column_slice(8, 16, grad1.as_slice()),
        ];
        for lie in &self.extra {
            rows.push(central_jacobian_dyn(|x| lie(x), &xv, self.step));
        }
        let nrows = rows.iter().map(|r| r.nrows()).sum();
        let mut out = DMatrix::zeros(nrows, 16);
        let mut at = 0;
        for r in rows {
            out.view_mut((at, 0), (r.nrows(), 16)).copy_from(&r);
            at += r.nrows();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualquat::{DualPose, TranslationFrame};
    use crate::dynamics::{kinematics_rate_raw, state_embed, ReducedState};
    use crate::quat::{UnitQuaternion, Vec3};

    fn sample() -> (RelativeState, MarkerConfig) {
        let x = state_embed(&ReducedState {
            q: UnitQuaternion::from_axis_angle(2.0, &Vec3::new(0.36, 0.48, 0.8)).unwrap(),
            r: Vec3::new(-1.0, 0.5, 4.0),
            omega: Vec3::new(0.3, -0.6, 0.2),
            v: Vec3::new(1.0, 0.0, -0.5),
        });
        let mq = UnitQuaternion::from_axis_angle(0.7, &Vec3::y()).unwrap();
        let m = DualPose::from_rotation_translation(&mq, &Vec3::new(0.2, 0.0, 0.1), TranslationFrame::Parent);
        (x, MarkerConfig::new(1, m))
    }

    #[test]
    fn lie0_edge_cases() {
        let (x, m) = sample();
        assert_eq!(lie0(&x, &MarkerConfig::at_origin(0)), *x.pose);
        assert_eq!(lie0(&RelativeState::identity(), &m), *m.pose_in_target);
    }

    #[test]
    fn grad_lie0_of_origin_marker() {
        let g = grad_lie0(&MarkerConfig::at_origin(0));
        let mut expected = Mat8x16::zeros();
        expected.fixed_view_mut::<8, 8>(0, 0).fill_with_identity();
        assert_eq!(g, expected);
    }

    #[test]
    fn lie1_edge_cases() {
        let (x, m) = sample();
        let still = RelativeState::new(x.pose, Default::default());
        assert_eq!(lie1(&still, &m).to_vector8().amax(), 0.0);
        let spin = state_embed(&ReducedState {
            omega: Vec3::new(0.2, 0.4, -0.6),
            v: Vec3::new(1.0, 2.0, 3.0),
            ..ReducedState::identity()
        });
        let l1 = lie1(&spin, &MarkerConfig::at_origin(0));
        assert_eq!(l1, spin.velocity.scale(0.5));
    }

    #[test]
    fn lie1_is_grad_lie0_times_field() {
        let (x, m) = sample();
        let f = kinematics_rate_raw(&x.to_vector16());
        let via_field = grad_lie0(&m) * f;
        assert!((via_field - lie1(&x, &m).to_vector8()).amax() < 1e-14);
    }

    #[test]
    fn grad_lie1_edge_cases() {
        let (x, m) = sample();
        let still = RelativeState::new(x.pose, Default::default());
        let g = grad_lie1(&still, &m);
        assert_eq!(g.fixed_view::<8, 8>(0, 0).amax(), 0.0);
        let expected = right_mat8(&dqmul(&still.pose, &m.pose_in_target)) * 0.5;
        assert_eq!(g.fixed_view::<8, 8>(0, 8).into_owned(), expected);
        let g = grad_lie1(&RelativeState::identity(), &MarkerConfig::at_origin(0));
        assert_eq!(g.fixed_view::<8, 8>(0, 8).into_owned(), Mat8::identity() * 0.5);
    }

    #[test]
    fn identity_observability_matrix() {
        let o = build_observability_matrix(&RelativeState::identity(), &MarkerConfig::at_origin(0));
        let mut expected = Mat16::identity();
        for i in 8..16 {
            expected[(i, i)] = 0.5;
        }
        assert_eq!(o.entries, expected);
        assert!(o.upper_right_is_zero());
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let (x, m) = sample();
        let (r0, r1) = fd_residuals(&x, &m, 1e-6);
        assert!(r0 < 1e-8, "grad L0 residual {r0}");
        assert!(r1 < 1e-7, "grad L1 residual {r1}");
    }

    #[test]
    fn builder_matches_analytic() {
        let (x, m) = sample();
        let field = |x: &Vec16| kinematics_rate_raw(x);
        let b = ObservabilityBuilder::new(m, &field);
        let numeric = b.build(&x);
        let analytic = build_observability_matrix(&x, &m);
        let diff = (numeric - DMatrix::from_column_slice(16, 16, analytic.entries.as_slice())).amax();
        assert!(diff < 1e-7, "{diff}");
    }

    #[test]
    fn builder_appends_extra_rows() {
        let (x, m) = sample();
        let field = |x: &Vec16| kinematics_rate_raw(x);
        let b = ObservabilityBuilder::new(m, &field)
            .with_lie_derivative(Box::new(|x: &Vec16| DVector::from_element(1, x[0] * x[0])));
        let o = b.build(&x);
        assert_eq!(o.shape(), (17, 16));
        assert!((o[(16, 0)] - 2.0 * x.pose.real.scalar).abs() < 1e-8);
    }
}
