//! Finite-horizon empirical observability Gramian.
//!
//! For each of the 16 ambient state coordinates the initial state is moved by
//! `±delta`, both copies are propagated, and the centered output difference
//! `(y⁺(t) − y⁻(t)) / 2δ` forms column i of `Y(t)`. The Gramian is the left
//! Riemann sum `G = Σₖ Y(tₖ)ᵀ Y(tₖ) dt` over `tₖ = k·dt`, `k < horizon/dt`.
//!
//! Perturbations stay in the ambient space and the perturbed trajectories are
//! not re-projected: projecting would remove the two directions normal to the
//! unit dual quaternions and cap the rank at 14.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dualquat::Vec8;
use crate::dynamics::{RelativeState, RelativeSystem, Vec16};
use crate::error::{AnalysisError, ModelError};
use crate::measurement::MarkerConfig;
use crate::observability::lie::{lie0_raw, Mat16};

/// Something that can propagate a raw 16-vector without re-projection.
pub trait AmbientFlow: Sync {
    fn propagate_ambient(
        &self,
        x0: &Vec16,
        dt: f64,
        steps: usize,
        visit: &mut dyn FnMut(f64, &Vec16),
    ) -> Result<(), ModelError>;
}

impl AmbientFlow for RelativeSystem {
    fn propagate_ambient(
        &self,
        x0: &Vec16,
        dt: f64,
        steps: usize,
        visit: &mut dyn FnMut(f64, &Vec16),
    ) -> Result<(), ModelError> {
        RelativeSystem::propagate_ambient(self, x0, dt, steps, visit)
    }
}

/// Zero vector field: the state never moves.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenFlow;

impl AmbientFlow for FrozenFlow {
    fn propagate_ambient(
        &self,
        x0: &Vec16,
        dt: f64,
        steps: usize,
        visit: &mut dyn FnMut(f64, &Vec16),
    ) -> Result<(), ModelError> {
        for k in 0..=steps {
            visit(k as f64 * dt, x0);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalGramian {
    pub entries: Mat16,
    pub horizon: f64,
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramianSummary {
    pub horizon: f64,
    pub perturbation: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub numeric_rank: usize,
    pub rank_tolerance: f64,
}

impl EmpiricalGramian {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.entries);
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Count of eigenvalues above `tol · λ_max`.
    pub fn numeric_rank(&self, tol: f64) -> usize {
        let eig = self.eigenvalues();
        let top = eig.first().copied().unwrap_or(0.0);
        eig.iter().filter(|&&l| l > tol * top).count()
    }

    pub fn summary(&self, tol: f64) -> GramianSummary {
        GramianSummary {
            horizon: self.horizon,
            perturbation: self.perturbation,
            eigenvalues: self.eigenvalues(),
            numeric_rank: self.numeric_rank(tol),
            rank_tolerance: tol,
        }
    }
}

/// Default perturbation size for [`empirical_gramian`].
pub const DEFAULT_DELTA: f64 = 1e-5;

pub fn empirical_gramian<F: AmbientFlow + ?Sized>(
    flow: &F,
    x0: &RelativeState,
    marker: &MarkerConfig,
    horizon: f64,
    dt: f64,
    delta: f64,
) -> Result<EmpiricalGramian, AnalysisError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!(
            "perturbation must be positive, got {delta}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ModelError::InvalidStep(dt).into());
    }
    let steps = ((horizon / dt).round() as usize).max(1);
    let base = x0.to_vector16();
    let m = marker.pose_in_target;

    let outputs = |x: &Vec16| -> Result<Vec<Vec8>, ModelError> {
        let mut ys = Vec::with_capacity(steps);
        flow.propagate_ambient(x, dt, steps - 1, &mut |_, x| {
            ys.push(lie0_raw(x, &m).to_vector8())
        })?;
        Ok(ys)
    };

    let columns: Vec<Vec<Vec8>> = (0..16)
        .into_par_iter()
        .map(|i| {
            let mut plus = base;
            let mut minus = base;
            plus[i] += delta;
            minus[i] -= delta;
            let yp = outputs(&plus)?;
            let ym = outputs(&minus)?;
            Ok(yp
                .iter()
                .zip(&ym)
                .map(|(a, b)| (a - b) / (2.0 * delta))
                .collect())
        })
        .collect::<Result<_, ModelError>>()?;

    let mut g = Mat16::zeros();
    #[allow(clippy::needless_range_loop)]
    for k in 0..steps {
        for i in 0..16 {
            for j in i..16 {
                let v = columns[i][k].dot(&columns[j][k]) * dt;
                g[(i, j)] += v;
            }
        }
    }
    for i in 0..16 {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    Ok(EmpiricalGramian {
        entries: g,
        horizon: steps as f64 * dt,
        perturbation: delta,
    })
}
