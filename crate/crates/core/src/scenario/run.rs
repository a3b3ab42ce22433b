use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{state_embed, state_reduce, Sample};
use crate::error::{AlgebraError, RunError, ScenarioError};
use crate::measurement::{measure_noisy_with, PoseMeasurement};
use crate::numeric::FD_STEP;
use crate::observability::gramian::DEFAULT_DELTA;
use crate::observability::{
    build_observability_matrix, empirical_gramian, fd_residuals, invariant_suite, lemma_suite, rank_report,
    rank_sweep, SweepSummary, DEFAULT_RANK_TOL,
};
use crate::sampling::StateBounds;
use crate::scenario::report::{CheckReport, EpochObservability, RunMetadata, RunReport, TrajectoryRow};
use crate::scenario::{Scenario, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityOptions {
    /// Number of epochs, spread evenly over the recorded trajectory from its
    /// first to its last sample.
    pub epochs: usize,
    pub rank_tol: f64,
    /// Also compute the empirical Gramian over the whole horizon.
    pub gramian: bool,
    /// Also run a randomized rank sweep of this many samples.
    pub sweep_samples: Option<usize>,
}

impl Default for ObservabilityOptions {
    fn default() -> Self {
        Self {
            epochs: 1,
            rank_tol: DEFAULT_RANK_TOL,
            gramian: false,
            sweep_samples: None,
        }
    }
}

/// Propagates the scenario and measures every recorded sample. Noise draws
/// come from one ChaCha stream seeded by the scenario, in sample order.
fn simulate(s: &Scenario) -> Result<Vec<(Sample, PoseMeasurement)>, RunError> {
    let steps = s.steps();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut out = Vec::with_capacity(steps / s.sample_every + 2);
    let mut failure: Option<AlgebraError> = None;
    let mut k = 0usize;
    s.system.propagate_with(&state_embed(&s.initial), s.dt, steps, |sample| {
        if (k.is_multiple_of(s.sample_every) || k == steps) && failure.is_none() {
            match measure_noisy_with(&sample.state, &s.marker, sample.t, &s.noise, &mut rng) {
                Ok(m) => out.push((*sample, m)),
                Err(e) => failure = Some(e),
            }
        }
        k += 1;
    })?;
    if let Some(e) = failure {
        return Err(crate::error::ModelError::from(e).into());
    }
    Ok(out)
}

fn trajectory(samples: &[(Sample, PoseMeasurement)]) -> Vec<TrajectoryRow> {
    samples
        .iter()
        .map(|(s, m)| TrajectoryRow {
            t: s.t,
            state: state_reduce(&s.state).to_array(),
            measurement: m.value.to_array(),
        })
        .collect()
}

fn base_report(s: &Scenario, command: &str, samples: &[(Sample, PoseMeasurement)]) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        metadata: RunMetadata::new(command, s.hash()),
        scenario: s.doc.clone(),
        trajectory: trajectory(samples),
        observability: Vec::new(),
        gramian: None,
        sweep: None,
    }
}

/// Runs the scenario and records the trajectory with its measurements.
pub fn run_simulate(s: &Scenario) -> Result<RunReport, RunError> {
    let samples = simulate(s)?;
    Ok(base_report(s, "simulate", &samples))
}

fn epoch_indices(n: usize, epochs: usize) -> Vec<usize> {
    match (n, epochs) {
        (0, _) | (_, 0) => Vec::new(),
        (_, 1) => vec![0],
        _ => {
            let mut idx: Vec<usize> = (0..epochs)
                .map(|i| ((i * (n - 1)) as f64 / (epochs - 1) as f64).round() as usize)
                .collect();
            idx.dedup();
            idx
        }
    }
}

/// Runs the scenario, then analyses observability at the requested epochs.
pub fn run_observability(s: &Scenario, opts: &ObservabilityOptions) -> Result<RunReport, RunError> {
    let samples = simulate(s)?;
    let mut report = base_report(s, "observability", &samples);

    for i in epoch_indices(samples.len(), opts.epochs) {
        let (sample, _) = &samples[i];
        let o = build_observability_matrix(&sample.state, &s.marker);
        let rank = rank_report(&o, opts.rank_tol)?;
        let (fd_residual_lie0, fd_residual_lie1) = fd_residuals(&sample.state, &s.marker, FD_STEP);
        let matrix = o.entries.row_iter().map(|r| r.iter().copied().collect()).collect();
        report.observability.push(EpochObservability {
            t: sample.t,
            rank,
            fd_residual_lie0,
            fd_residual_lie1,
            matrix,
        });
    }

    if opts.gramian {
        if s.steps() == 0 {
            return Err(ScenarioError::invalid(
                "integration.duration",
                "the empirical Gramian needs a positive horizon",
            )
            .into());
        }
        let g = empirical_gramian(
            &s.system,
            &state_embed(&s.initial),
            &s.marker,
            s.duration,
            s.dt,
            DEFAULT_DELTA,
        )?;
        report.gramian = Some(g.summary(opts.rank_tol));
    }

    if let Some(n) = opts.sweep_samples {
        report.sweep = Some(run_sweep(n, s.seed, opts.rank_tol)?);
    }
    Ok(report)
}

/// Randomized rank sweep over states with `‖r‖, ‖ω‖, ‖v‖ ≤ 10` and marker
/// offsets up to 10.
pub fn run_sweep(samples: usize, seed: u64, rank_tol: f64) -> Result<SweepSummary, RunError> {
    let bounds = StateBounds::default();
    Ok(rank_sweep(samples, seed, rank_tol, &bounds, bounds.max_position)?)
}

/// Lemma checks plus observability invariants.
pub fn run_check(samples: usize, seed: u64, rank_tol: f64) -> Result<CheckReport, RunError> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(crate::error::AnalysisError::InvalidTolerance(rank_tol).into());
    }
    let mut checks = lemma_suite(samples, seed);
    checks.extend(invariant_suite(samples, seed.wrapping_add(1), rank_tol));
    let passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        samples,
        seed,
        checks,
        passed,
    })
}
