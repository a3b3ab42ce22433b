//! Randomized checks of the observability matrix itself: Jacobian fidelity,
//! the structural zero block, the identity-state spectrum, independence from
//! inertia and wrench, and full rank.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dualquat::DualQuaternion;
use crate::dynamics::{kinematics_rate_raw, relative_rate_raw, DualForce, MassMatrix, RelativeState, Vec16};
use crate::measurement::MarkerConfig;
use crate::numeric::FD_STEP;
use crate::observability::lemmas::LemmaCheck;
use crate::observability::lie::{build_observability_matrix, fd_residuals, ObservabilityBuilder};
use crate::observability::rank::rank_report;
use crate::quat::{Mat3, Vec3};
use crate::sampling::{self, StateBounds};

/// Analytic-versus-finite-difference agreement required of both Jacobians.
pub const JACOBIAN_TOL: f64 = 1e-6;

fn draw(rng: &mut ChaCha8Rng) -> (RelativeState, MarkerConfig) {
    let x = sampling::relative_state(rng, &StateBounds::default());
    let m = MarkerConfig::new(0, sampling::dual_pose(rng, 10.0));
    (x, m)
}

fn jacobian_fidelity(rng: &mut ChaCha8Rng, samples: usize) -> LemmaCheck {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (x, m) = draw(rng);
        let (r0, r1) = fd_residuals(&x, &m, FD_STEP);
        worst = worst.max(r0).max(r1);
    }
    LemmaCheck {
        name: "analytic Lie derivative Jacobians match central differences".into(),
        samples,
        passed: worst <= JACOBIAN_TOL,
        worst,
        detail: format!("max |analytic − FD|, step {FD_STEP:e}"),
    }
}

fn structural_zero(rng: &mut ChaCha8Rng, samples: usize) -> LemmaCheck {
    let mut failures = 0;
    for _ in 0..samples {
        let (x, m) = draw(rng);
        if !build_observability_matrix(&x, &m).upper_right_is_zero() {
            failures += 1;
        }
    }
    LemmaCheck {
        name: "upper right block of O is exactly zero".into(),
        samples,
        passed: failures == 0,
        worst: failures as f64,
        detail: format!("{failures} matrices with a nonzero entry"),
    }
}

fn identity_spectrum() -> LemmaCheck {
    let o = build_observability_matrix(&RelativeState::identity(), &MarkerConfig::at_origin(0));
    let worst = match rank_report(&o, 1e-10) {
        Ok(r) => r
            .singular_values
            .iter()
            .enumerate()
            .map(|(i, s)| (s - if i < 8 { 1.0 } else { 0.5 }).abs())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    LemmaCheck {
        name: "identity-state O has singular values 1 (×8) and ½ (×8)".into(),
        samples: 1,
        passed: worst <= 1e-12,
        worst,
        detail: "max deviation from the block-diagonal spectrum".into(),
    }
}

fn random_mass(rng: &mut ChaCha8Rng) -> MassMatrix {
    // principal moments that satisfy the triangle inequality, then rotated
    let a = 1.0 + 9.0 * rand::Rng::random::<f64>(rng);
    let b = 1.0 + 9.0 * rand::Rng::random::<f64>(rng);
    let c = (a - b).abs() + (a + b - (a - b).abs()) * rand::Rng::random::<f64>(rng);
    let r = sampling::unit_quaternion(rng);
    let rot = r.to_rotation_matrix();
    let j = rot * Mat3::from_diagonal(&Vec3::new(a, b, c.max(1e-3))) * rot.transpose();
    let j = (j + j.transpose()) * 0.5;
    MassMatrix::new(0.5 + 100.0 * rand::Rng::random::<f64>(rng), j).unwrap_or_else(|_| MassMatrix::identity())
}

/// O assembled numerically from `∇L⁰ · f(x)` for three vector fields: full
/// dynamics under two unrelated mass/wrench sets and kinematics alone. All
/// three must agree exactly.
fn dynamics_independence(rng: &mut ChaCha8Rng, samples: usize) -> LemmaCheck {
    let mut failures = 0;
    for _ in 0..samples {
        let (x, m) = draw(rng);
        let bodies: Vec<(MassMatrix, DualForce)> = (0..4)
            .map(|_| {
                let f = DualForce::new(sampling::ball(rng, 5.0), sampling::ball(rng, 5.0));
                (random_mass(rng), f)
            })
            .collect();
        let w_ci = DualQuaternion::pure(sampling::ball(rng, 1.0), sampling::ball(rng, 1.0));
        let full = |k: usize| {
            let (tm, tf) = &bodies[2 * k];
            let (cm, cf) = &bodies[2 * k + 1];
            move |x: &Vec16| relative_rate_raw(x, (tm, tf), (cm, cf), &w_ci)
        };
        let f1 = full(0);
        let f2 = full(1);
        let kin = |x: &Vec16| kinematics_rate_raw(x);
        let o1 = ObservabilityBuilder::new(m, &f1).build(&x);
        let o2 = ObservabilityBuilder::new(m, &f2).build(&x);
        let ok = ObservabilityBuilder::new(m, &kin).build(&x);
        if !(exactly_equal(&o1, &o2) && exactly_equal(&o1, &ok)) {
            failures += 1;
        }
    }
    LemmaCheck {
        name: "O is unchanged by inertia, wrench, and dropping the dynamics".into(),
        samples,
        passed: failures == 0,
        worst: failures as f64,
        detail: format!("{failures} states with a differing entry"),
    }
}

/// Entrywise `==`, so `+0.0` and `−0.0` compare equal.
pub fn exactly_equal(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| x == y)
}

fn full_rank(rng: &mut ChaCha8Rng, samples: usize, tol: f64) -> LemmaCheck {
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let (x, m) = draw(rng);
        match rank_report(&build_observability_matrix(&x, &m), tol) {
            Ok(r) => {
                if !r.full_rank {
                    failures += 1;
                }
                worst = worst.min(r.min_singular_value());
            }
            Err(_) => failures += 1,
        }
    }
    LemmaCheck {
        name: "O has rank 16 at random states and markers".into(),
        samples,
        passed: failures == 0,
        worst,
        detail: format!("{failures} rank-deficient at tolerance {tol:e}; worst value is min σ_min"),
    }
}

/// Runs the observability invariants with `samples` random draws each.
pub fn invariant_suite(samples: usize, seed: u64, tol: f64) -> Vec<LemmaCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        jacobian_fidelity(&mut rng, samples),
        structural_zero(&mut rng, samples),
        identity_spectrum(),
        dynamics_independence(&mut rng, samples.min(1000)),
        full_rank(&mut rng, samples, tol),
    ]
}
