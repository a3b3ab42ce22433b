//! Central finite differences.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian of `f` at `x`.
pub fn central_jacobian<const N: usize, const M: usize>(
    f: impl Fn(&SVector<f64, N>) -> SVector<f64, M>,
    x: &SVector<f64, N>,
    step: f64,
) -> SMatrix<f64, M, N> {
    let mut jac = SMatrix::<f64, M, N>::zeros();
    for j in 0..N {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += step;
        minus[j] -= step;
        let col = (f(&plus) - f(&minus)) / (2.0 * step);
        jac.set_column(j, &col);
    }
    jac
}

/// As [`central_jacobian`] for functions with a run-time output size.
pub fn central_jacobian_dyn<const N: usize>(
    f: impl Fn(&SVector<f64, N>) -> DVector<f64>,
    x: &SVector<f64, N>,
    step: f64,
) -> DMatrix<f64> {
    let mut cols = Vec::with_capacity(N);
    for j in 0..N {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += step;
        minus[j] -= step;
        cols.push((f(&plus) - f(&minus)) / (2.0 * step));
    }
    DMatrix::from_columns(&cols)
}
