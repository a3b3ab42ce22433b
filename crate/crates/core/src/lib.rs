//! Dual-quaternion relative pose toolkit.
//!
//! A chaser spacecraft carrying a camera observes a single fiducial marker
//! fixed on a target body. The crate provides the quaternion and dual
//! quaternion algebra, the relative rigid-body dynamics of the target as seen
//! from the chaser, the marker pose measurement model, and a Lie-derivative
//! observability analysis showing that one marker makes the 16-dimensional
//! relative state locally weakly observable.
//!
//! Conventions: quaternions are scalar first and Hamilton; `left_mat(a) b = ab`
//! and `right_mat(b) a = ab`. A pose `q̂ = q + ε ½ r q` stores the rotation of
//! the child frame and the translation expressed in the parent frame.

pub mod dualquat;
pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod numeric;
pub mod observability;
pub mod quat;
pub mod sampling;
pub mod scenario;

/// Re-exported so downstream crates use the same matrix types.
pub use nalgebra;

pub use dualquat::{DualPose, DualQuaternion, DualVelocity, UnitDualQuaternion};
pub use dynamics::{MassMatrix, ReducedState, RelativeState, RelativeSystem};
pub use error::{AlgebraError, AnalysisError, ModelError};
pub use measurement::{MarkerConfig, PoseMeasurement};
pub use quat::{Quaternion, UnitQuaternion};
