use thiserror::Error;

/// Failures of the quaternion and dual-quaternion constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("quaternion is not unit (squared norm {norm2})")]
    NotUnit { norm2: f64 },
    #[error("dual quaternion parts are not orthogonal (real·dual = {dot})")]
    NotOrthogonal { dot: f64 },
    #[error("rotation axis is not unit (norm {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("expected a vector quaternion, scalar part is {scalar}")]
    NotPure { scalar: f64 },
    #[error("non-finite component")]
    NonFinite,
}

/// Failures of the physical model and integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid mass properties: {0}")]
    InvalidMass(String),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("propagation diverged after t = {last_good_time} s")]
    Divergence { last_good_time: f64 },
}

/// Failures of the observability analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("rank tolerance must lie in (0, 1), got {0}")]
    InvalidTolerance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Failures reading or validating a scenario file.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
}

impl ScenarioError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl std::fmt::Display) -> Self {
        Self::Validation {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

/// Anything a scenario run can fail with.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl RunError {
    /// Process exit status: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) | RunError::Output(_) => 1,
            RunError::Analysis(AnalysisError::InvalidTolerance(_))
            | RunError::Analysis(AnalysisError::InvalidParameter(_)) => 1,
            RunError::Model(ModelError::InvalidStep(_)) => 1,
            RunError::Model(_) | RunError::Analysis(_) => 2,
        }
    }
}
