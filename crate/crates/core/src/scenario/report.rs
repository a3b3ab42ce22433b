use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::RunError;
use crate::observability::{GramianSummary, LemmaCheck, ObservabilityReport, SweepSummary};
use crate::scenario::ScenarioDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Hex SHA-256 of the compact scenario echo.
    pub scenario_hash: String,
}

impl RunMetadata {
    pub(crate) fn new(command: &str, scenario_hash: String) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario_hash,
        }
    }
}

/// One trajectory sample: `[q, r, ω, v]` of the relative state and the
/// (possibly noisy) marker measurement `q̂_{M/C}` as `[real; dual]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub state: [f64; 13],
    pub measurement: [f64; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochObservability {
    pub t: f64,
    pub rank: ObservabilityReport,
    /// Max absolute difference between analytic and central-difference
    /// Jacobians of L⁰ and L¹.
    pub fd_residual_lie0: f64,
    pub fd_residual_lie1: f64,
    /// The 16×16 observability matrix, row major.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub scenario: ScenarioDoc,
    pub trajectory: Vec<TrajectoryRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observability: Vec<EpochObservability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gramian: Option<GramianSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
}

impl RunReport {
    /// True when every analysed epoch, the Gramian and the sweep (whichever
    /// are present) reached full rank.
    pub fn all_full_rank(&self) -> bool {
        self.observability.iter().all(|e| e.rank.full_rank)
            && self.gramian.as_ref().is_none_or(|g| g.numeric_rank == 16)
            && self.sweep.as_ref().is_none_or(|s| s.full_rank_count == s.samples)
    }
}

/// Output of the `check` verb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
    pub passed: bool,
}

pub const CSV_HEADER: [&str; 22] = [
    "t", "q0", "q1", "q2", "q3", "rx", "ry", "rz", "wx", "wy", "wz", "vx", "vy", "vz", "y_r0",
    "y_r1", "y_r2", "y_r3", "y_d0", "y_d1", "y_d2", "y_d3",
];

/// Writes the report as pretty JSON, or the trajectory alone as CSV.
pub fn emit(report: &RunReport, format: OutputFormat, out: &mut dyn Write) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Output(e.to_string());
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(|e| RunError::Output(e.to_string()))?;
            out.write_all(b"\n").map_err(io)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            let csv_err = |e: csv::Error| RunError::Output(e.to_string());
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for row in &report.trajectory {
                let fields = std::iter::once(row.t)
                    .chain(row.state.iter().copied())
                    .chain(row.measurement.iter().copied())
                    .map(|v| v.to_string());
                w.write_record(fields).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}
