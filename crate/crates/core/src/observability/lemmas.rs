//! Randomized checks of the triangular-matrix and multiplication-matrix rank
//! facts the full-rank argument rests on.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dualquat::{left_mat8, right_mat8};
use crate::observability::rank::singular_values;
use crate::quat::{left_mat, qnorm2, right_mat, Quaternion};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub samples: usize,
    pub passed: bool,
    /// Worst value of the checked quantity over all samples.
    pub worst: f64,
    pub detail: String,
}

/// Determinant tolerance for the unit multiplication matrices.
pub const DET_TOL: f64 = 1e-12;

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Gaussian entries, diagonal pushed away from zero.
fn random_triangular(rng: &mut impl Rng, n: usize, upper: bool) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d: f64 = gaussian(rng);
            d.signum() * (0.5 + d.abs())
        } else if (upper && j > i) || (!upper && j < i) {
            gaussian(rng)
        } else {
            0.0
        }
    })
}

fn rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m).unwrap_or_default();
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > 1e-10 * top).count()
}

/// Checks that the characteristic polynomial is `∏(z − tᵢᵢ)` at random `z`
/// and that every diagonal entry is a root. Comparing eigen-solver output
/// with the diagonal directly would test the solver instead: eigenvalues of
/// a non-normal triangle with close diagonal entries are computed to only
/// about `√ε`.
fn triangular_eigenvalues(rng: &mut impl Rng, samples: usize) -> LemmaCheck {
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = 2 + k % 7;
        let t = random_triangular(rng, n, k % 2 == 0);
        let diag: Vec<f64> = t.diagonal().iter().copied().collect();
        for _ in 0..3 {
            let z = 3.0 * gaussian(rng);
            let char_poly = (DMatrix::identity(n, n) * z - &t).determinant();
            let product: f64 = diag.iter().map(|d| z - d).product();
            worst = worst.max((char_poly - product).abs() / product.abs().max(1.0));
        }
        for d in &diag {
            let shifted = &t - DMatrix::identity(n, n) * *d;
            worst = worst.max(shifted.determinant().abs());
        }
    }
    LemmaCheck {
        name: "triangular eigenvalues are the diagonal".into(),
        samples,
        passed: worst <= 1e-9,
        worst,
        detail: "max relative |det(zI − T) − ∏(z − tᵢᵢ)| and |det(T − tᵢᵢI)|".into(),
    }
}

fn proper_triangular_full_rank(rng: &mut impl Rng, samples: usize) -> LemmaCheck {
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for k in 0..samples {
        let n = 2 + k % 15;
        let t = random_triangular(rng, n, k % 2 == 1);
        if rank(&t) != n {
            failures += 1;
        }
        let s = singular_values(&t).unwrap_or_default();
        worst = worst.min(s.last().copied().unwrap_or(0.0));
    }
    LemmaCheck {
        name: "proper triangular matrix is full rank".into(),
        samples,
        passed: failures == 0,
        worst,
        detail: format!("{failures} rank-deficient; worst value is min σ_min"),
    }
}

fn block_triangular_full_rank(rng: &mut impl Rng, samples: usize) -> LemmaCheck {
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for k in 0..samples {
        let a = 1 + k % 8;
        let b = 1 + (k / 8) % 8;
        let n = a + b;
        // full-rank diagonal blocks: orthogonal factor times a proper triangle
        let d1 = random_triangular(rng, a, true);
        let d2 = random_triangular(rng, b, false);
        let q1 = DMatrix::<f64>::from_fn(a, a, |_, _| gaussian(rng)).qr().q();
        let q2 = DMatrix::<f64>::from_fn(b, b, |_, _| gaussian(rng)).qr().q();
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (a, a)).copy_from(&(q1 * d1));
        m.view_mut((a, a), (b, b)).copy_from(&(q2 * d2));
        let off = DMatrix::<f64>::from_fn(b, a, |_, _| gaussian(rng));
        m.view_mut((a, 0), (b, a)).copy_from(&off);
        if rank(&m) != n {
            failures += 1;
        }
        let s = singular_values(&m).unwrap_or_default();
        worst = worst.min(s.last().copied().unwrap_or(0.0));
    }
    LemmaCheck {
        name: "block triangular matrix with full-rank diagonal blocks is full rank".into(),
        samples,
        passed: failures == 0,
        worst,
        detail: format!("{failures} rank-deficient; worst value is min σ_min"),
    }
}

fn multiplication_determinants(rng: &mut impl Rng, samples: usize) -> LemmaCheck {
    let mut worst: f64 = 0.0;
    let mut worst_general: f64 = 0.0;
    for _ in 0..samples {
        let q = sampling::unit_quaternion(rng);
        let dl = left_mat(&q).determinant();
        let dr = right_mat(&q).determinant();
        worst = worst.max((dl - 1.0).abs()).max((dr - 1.0).abs());

        let g = Quaternion::from_array([gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)]);
        let n2 = qnorm2(&g);
        let expected = n2 * n2;
        for d in [left_mat(&g).determinant(), right_mat(&g).determinant()] {
            worst_general = worst_general.max((d - expected).abs() / expected.max(1.0));
        }
    }
    LemmaCheck {
        name: "det of unit quaternion multiplication matrices is 1".into(),
        samples,
        passed: worst <= DET_TOL && worst_general <= 1e-12,
        worst,
        detail: format!("non-unit det = ‖q‖⁴ relative error {worst_general:e}"),
    }
}

fn dual_multiplication_full_rank(rng: &mut impl Rng, samples: usize) -> LemmaCheck {
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..samples {
        let p = sampling::dual_pose(rng, 10.0);
        for m in [left_mat8(&p), right_mat8(&p)] {
            let m = DMatrix::from_column_slice(8, 8, m.as_slice());
            let s = singular_values(&m).unwrap_or_default();
            let smin = s.last().copied().unwrap_or(0.0);
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN counts as a failure
            if !(smin > 0.0) || rank(&m) != 8 {
                failures += 1;
            }
            worst = worst.min(smin);
        }
    }
    LemmaCheck {
        name: "unit dual quaternion multiplication matrices are full rank".into(),
        samples,
        passed: failures == 0,
        worst,
        detail: format!("{failures} rank-deficient; worst value is min σ_min"),
    }
}

/// Runs every check with `samples` random draws each.
pub fn lemma_suite(samples: usize, seed: u64) -> Vec<LemmaCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        triangular_eigenvalues(&mut rng, samples),
        proper_triangular_full_rank(&mut rng, samples),
        block_triangular_full_rank(&mut rng, samples),
        multiplication_determinants(&mut rng, samples),
        dual_multiplication_full_rank(&mut rng, samples),
    ]
}

/// `det(⟦q⟧_L)` expanded as the degree-4 polynomial in the components.
pub fn left_mat_det_polynomial(q: &Quaternion) -> f64 {
    let [a, b, c, d] = q.to_array().map(|x| x * x);
    a * a + 2.0 * a * b + 2.0 * a * c + 2.0 * a * d + b * b + 2.0 * b * c + 2.0 * b * d + c * c
        + 2.0 * c * d
        + d * d
}
