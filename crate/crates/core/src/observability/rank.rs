//! Numeric rank from singular values.

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::observability::lie::ObservabilityMatrix;

/// Default relative rank tolerance: `σᵢ > 1e-10 σ₁` counts toward the rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    /// Descending.
    pub singular_values: Vec<f64>,
    pub numeric_rank: usize,
    pub rank_tolerance: f64,
    /// `σ₁ / σ_min`; `None` when `σ_min` is zero.
    pub condition_number: Option<f64>,
    pub full_rank: bool,
}

impl ObservabilityReport {
    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>, AnalysisError> {
    if m.iter().any(|c| !c.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Rank report for any square or rectangular matrix; `full_rank` means the
/// rank equals the column count.
pub fn rank_report_dyn(m: &DMatrix<f64>, tol: f64) -> Result<ObservabilityReport, AnalysisError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(AnalysisError::InvalidTolerance(tol));
    }
    let s = singular_values(m)?;
    let sigma1 = s.first().copied().unwrap_or(0.0);
    let numeric_rank = s.iter().filter(|&&v| v > tol * sigma1).count();
    let smin = s.last().copied().unwrap_or(0.0);
    Ok(ObservabilityReport {
        condition_number: (smin > 0.0).then(|| sigma1 / smin),
        full_rank: numeric_rank == m.ncols(),
        numeric_rank,
        rank_tolerance: tol,
        singular_values: s,
    })
}

pub fn rank_report(o: &ObservabilityMatrix, tol: f64) -> Result<ObservabilityReport, AnalysisError> {
    rank_report_dyn(&DMatrix::from_column_slice(16, 16, o.entries.as_slice()), tol)
}
