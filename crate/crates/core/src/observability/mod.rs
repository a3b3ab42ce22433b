//! Local weak observability of the relative pose system with a single marker
//! measurement: Lie derivatives, the 16×16 observability matrix, its numeric
//! rank, an empirical Gramian cross-check, and randomized sweeps.

pub mod gramian;
pub mod invariants;
pub mod lemmas;
pub mod lie;
pub mod rank;

pub use gramian::{empirical_gramian, AmbientFlow, EmpiricalGramian, FrozenFlow, GramianSummary};
pub use invariants::invariant_suite;
pub use lemmas::{lemma_suite, LemmaCheck};
pub use lie::{
    build_observability_matrix, fd_residuals, grad_lie0, grad_lie1, lie0, lie1, Mat16, Mat8x16,
    ObservabilityBuilder, ObservabilityMatrix,
};
pub use rank::{rank_report, ObservabilityReport, DEFAULT_RANK_TOL};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::measurement::MarkerConfig;
use crate::sampling::{self, StateBounds};

/// Outcome of a randomized full-rank sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub samples: usize,
    pub seed: u64,
    pub rank_tolerance: f64,
    pub full_rank_count: usize,
    /// Smallest `σ_min(O)` seen.
    pub min_singular_value: f64,
    /// Smallest `σ_min / σ₁` seen.
    pub min_relative_singular_value: f64,
    /// Largest condition number seen.
    pub max_condition_number: Option<f64>,
    /// Indices of samples that were not full rank.
    pub deficient: Vec<usize>,
}

/// Draws `samples` random unit states (bounded velocities) and unit marker
/// poses and reports the rank of each observability matrix. Sample `i` uses
/// its own ChaCha stream, so results do not depend on thread scheduling.
pub fn rank_sweep(
    samples: usize,
    seed: u64,
    tol: f64,
    bounds: &StateBounds,
    max_marker_offset: f64,
) -> Result<SweepSummary, AnalysisError> {
    let reports: Vec<ObservabilityReport> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = sampling::relative_state(&mut rng, bounds);
            let marker = MarkerConfig::new(0, sampling::dual_pose(&mut rng, max_marker_offset));
            rank_report(&build_observability_matrix(&x, &marker), tol)
        })
        .collect::<Result<_, _>>()?;

    let mut summary = SweepSummary {
        samples,
        seed,
        rank_tolerance: tol,
        full_rank_count: 0,
        min_singular_value: f64::INFINITY,
        min_relative_singular_value: f64::INFINITY,
        max_condition_number: Some(0.0),
        deficient: Vec::new(),
    };
    for (i, r) in reports.iter().enumerate() {
        if r.full_rank {
            summary.full_rank_count += 1;
        } else {
            summary.deficient.push(i);
        }
        let smin = r.min_singular_value();
        summary.min_singular_value = summary.min_singular_value.min(smin);
        let top = r.singular_values.first().copied().unwrap_or(0.0);
        if top > 0.0 {
            summary.min_relative_singular_value = summary.min_relative_singular_value.min(smin / top);
        }
        summary.max_condition_number = match (summary.max_condition_number, r.condition_number) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    Ok(summary)
}
