//! Scenario files, batch runs and report emission.
//!
//! A scenario is one JSON document. Every section is optional; the smallest
//! valid file is `{"schema_version": 1}`, which describes an identity relative
//! state between two unit-mass bodies with an inertially fixed chaser.
//! Angles are given in degrees and converted once at parse time.

mod report;
mod run;

pub use report::{emit, CheckReport, EpochObservability, OutputFormat, RunMetadata, RunReport, TrajectoryRow};
pub use run::{run_check, run_observability, run_simulate, run_sweep, ObservabilityOptions};

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dualquat::{DualPose, DualVelocity, TranslationFrame};
use crate::dynamics::{ChaserMotion, DualForce, MassMatrix, ReducedState, RelativeSystem, WrenchModel};
use crate::error::ScenarioError;
use crate::measurement::{MarkerConfig, PoseNoise};
use crate::quat::{Mat3, Quaternion, UnitQuaternion, Vec3};

pub const SCHEMA_VERSION: u32 = 1;

/// Orientation as axis-angle in degrees or as a scalar-first quaternion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum AttitudeDoc {
    AxisAngle { axis: [f64; 3], angle_deg: f64 },
    Quaternion { quaternion: [f64; 4] },
}

impl Default for AttitudeDoc {
    fn default() -> Self {
        AttitudeDoc::Quaternion {
            quaternion: [1.0, 0.0, 0.0, 0.0],
        }
    }
}

/// Relative state of the target with respect to the chaser camera, all in
/// camera coordinates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialStateDoc {
    pub attitude: AttitudeDoc,
    pub position: [f64; 3],
    /// rad/s.
    pub angular_velocity: [f64; 3],
    pub velocity: [f64; 3],
}

/// Principal moments or a full symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InertiaDoc {
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
}

impl Default for InertiaDoc {
    fn default() -> Self {
        InertiaDoc::Diagonal([1.0, 1.0, 1.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrenchPointDoc {
    pub t: f64,
    #[serde(default)]
    pub force: [f64; 3],
    #[serde(default)]
    pub torque: [f64; 3],
}

/// Body-frame force and torque.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WrenchDoc {
    // braces so that extra keys are rejected
    Zero {},
    Constant {
        #[serde(default)]
        force: [f64; 3],
        #[serde(default)]
        torque: [f64; 3],
    },
    /// Piecewise linear in time, held constant outside the table.
    Tabulated { points: Vec<WrenchPointDoc> },
}

impl Default for WrenchDoc {
    fn default() -> Self {
        WrenchDoc::Zero {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyDoc {
    pub mass: f64,
    pub inertia: InertiaDoc,
    pub wrench: WrenchDoc,
}

impl Default for BodyDoc {
    fn default() -> Self {
        Self {
            mass: 1.0,
            inertia: InertiaDoc::default(),
            wrench: WrenchDoc::Zero {},
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionDoc {
    Fixed {},
    /// Chaser inertial velocity in chaser coordinates at t = 0.
    Propagated {
        #[serde(default)]
        angular_velocity: [f64; 3],
        #[serde(default)]
        velocity: [f64; 3],
    },
}

impl Default for MotionDoc {
    fn default() -> Self {
        MotionDoc::Fixed {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaserDoc {
    pub mass: f64,
    pub inertia: InertiaDoc,
    pub wrench: WrenchDoc,
    pub motion: MotionDoc,
}

impl ChaserDoc {
    fn body(&self) -> BodyDoc {
        BodyDoc {
            mass: self.mass,
            inertia: self.inertia.clone(),
            wrench: self.wrench.clone(),
        }
    }
}

impl Default for ChaserDoc {
    fn default() -> Self {
        let b = BodyDoc::default();
        Self {
            mass: b.mass,
            inertia: b.inertia,
            wrench: b.wrench,
            motion: MotionDoc::Fixed {},
        }
    }
}

/// Marker pose in the target frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerDoc {
    pub id: u32,
    pub attitude: AttitudeDoc,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationDoc {
    pub dt: f64,
    pub duration: f64,
    /// Keep every n-th integration step in the trajectory. The final step is
    /// always kept.
    pub sample_every: usize,
}

impl Default for IntegrationDoc {
    fn default() -> Self {
        Self {
            dt: crate::dynamics::DEFAULT_DT,
            duration: 1.0,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseDoc {
    pub sigma_rot_deg: f64,
    pub sigma_trans: f64,
}

/// The scenario document as written, with defaults filled in. This is what
/// reports echo back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub initial_state: InitialStateDoc,
    #[serde(default)]
    pub target: BodyDoc,
    #[serde(default)]
    pub chaser: ChaserDoc,
    #[serde(default)]
    pub marker: MarkerDoc,
    #[serde(default)]
    pub integration: IntegrationDoc,
    #[serde(default)]
    pub noise: NoiseDoc,
    #[serde(default)]
    pub seed: u64,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub initial: ReducedState,
    pub system: RelativeSystem,
    pub marker: MarkerConfig,
    pub dt: f64,
    pub duration: f64,
    pub sample_every: usize,
    pub noise: PoseNoise,
    pub seed: u64,
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json_str(&text)
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| {
            let mut message = e.to_string();
            // serde_json appends the position, which is reported separately
            if let Some(at) = message.rfind(" at line ") {
                message.truncate(at);
            }
            ScenarioError::Parse {
                line: e.line(),
                column: e.column(),
                message,
            }
        })?;
        Self::from_doc(doc)
    }

    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ScenarioError> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", doc.schema_version),
            ));
        }
        let init = &doc.initial_state;
        let initial = ReducedState {
            q: attitude(&init.attitude, "initial_state.attitude")?,
            r: vector(&init.position, "initial_state.position")?,
            omega: vector(&init.angular_velocity, "initial_state.angular_velocity")?,
            v: vector(&init.velocity, "initial_state.velocity")?,
        };

        let (target_mass, target_wrench) = body(&doc.target, "target")?;
        let (chaser_mass, chaser_wrench) = body(&doc.chaser.body(), "chaser")?;
        let chaser_motion = match &doc.chaser.motion {
            MotionDoc::Fixed {} => {
                if !chaser_wrench.is_zero() {
                    return Err(ScenarioError::invalid(
                        "chaser.wrench",
                        "an inertially fixed chaser cannot carry a wrench",
                    ));
                }
                ChaserMotion::Fixed
            }
            MotionDoc::Propagated {
                angular_velocity,
                velocity,
            } => {
                let w = vector(angular_velocity, "chaser.motion.angular_velocity")?;
                let v = vector(velocity, "chaser.motion.velocity")?;
                ChaserMotion::Propagated(DualVelocity::from_twist(&w, &v, &Vec3::zeros()))
            }
        };

        let m = &doc.marker;
        let marker_q = attitude(&m.attitude, "marker.attitude")?;
        let marker_r = vector(&m.position, "marker.position")?;
        let marker = MarkerConfig::new(
            m.id,
            DualPose::from_rotation_translation(&marker_q, &marker_r, TranslationFrame::Parent),
        );

        let int = &doc.integration;
        if !(int.dt.is_finite() && int.dt > 0.0) {
            return Err(ScenarioError::invalid("integration.dt", format!("must be positive, got {}", int.dt)));
        }
        if !(int.duration.is_finite() && int.duration >= 0.0) {
            return Err(ScenarioError::invalid(
                "integration.duration",
                format!("must be non-negative, got {}", int.duration),
            ));
        }
        if int.sample_every == 0 {
            return Err(ScenarioError::invalid("integration.sample_every", "must be at least 1"));
        }
        let ratio = int.duration / int.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            log::warn!(
                "duration {} is not a multiple of dt {}; running {} steps",
                int.duration,
                int.dt,
                ratio.round()
            );
        }

        let n = &doc.noise;
        for (value, field) in [(n.sigma_rot_deg, "noise.sigma_rot_deg"), (n.sigma_trans, "noise.sigma_trans")] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScenarioError::invalid(field, format!("must be non-negative, got {value}")));
            }
        }

        Ok(Scenario {
            initial,
            system: RelativeSystem {
                target_mass,
                target_wrench,
                chaser_mass,
                chaser_wrench,
                chaser_motion,
            },
            marker,
            dt: int.dt,
            duration: int.duration,
            sample_every: int.sample_every,
            noise: PoseNoise {
                sigma_rot: n.sigma_rot_deg.to_radians(),
                sigma_trans: n.sigma_trans,
            },
            seed: doc.seed,
            doc,
        })
    }

    /// Number of integration steps covering the duration.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// The scenario document with defaults filled in, pretty printed.
    /// Parsing it again yields an identical scenario.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("scenario documents always serialize")
    }

    /// Hex SHA-256 of the compact echo.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.doc).expect("scenario documents always serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn vector(v: &[f64; 3], field: &str) -> Result<Vec3, ScenarioError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(Vec3::from(*v))
    } else {
        Err(ScenarioError::invalid(field, "non-finite component"))
    }
}

fn attitude(a: &AttitudeDoc, field: &str) -> Result<UnitQuaternion, ScenarioError> {
    match a {
        AttitudeDoc::Quaternion { quaternion } => {
            let field = format!("{field}.quaternion");
            if !quaternion.iter().all(|c| c.is_finite()) {
                return Err(ScenarioError::invalid(field, "non-finite component"));
            }
            UnitQuaternion::new(Quaternion::from_array(*quaternion))
                .map_err(|e| ScenarioError::invalid(field, e))
        }
        AttitudeDoc::AxisAngle { axis, angle_deg } => {
            let axis = vector(axis, &format!("{field}.axis"))?;
            let norm = axis.norm();
            if norm == 0.0 {
                return Err(ScenarioError::invalid(format!("{field}.axis"), "zero axis"));
            }
            if !angle_deg.is_finite() {
                return Err(ScenarioError::invalid(format!("{field}.angle_deg"), "non-finite angle"));
            }
            // axes are direction only; scaling is not an error
            UnitQuaternion::from_axis_angle(angle_deg.to_radians(), &(axis / norm))
                .map_err(|e| ScenarioError::invalid(format!("{field}.axis"), e))
        }
    }
}

fn inertia(doc: &InertiaDoc, field: &str) -> Result<Mat3, ScenarioError> {
    let m = match doc {
        InertiaDoc::Diagonal(d) => Mat3::from_diagonal(&Vec3::from(*d)),
        InertiaDoc::Full(rows) => Mat3::from_fn(|i, j| rows[i][j]),
    };
    if m.iter().all(|c| c.is_finite()) {
        Ok(m)
    } else {
        Err(ScenarioError::invalid(field, "non-finite component"))
    }
}

fn wrench(doc: &WrenchDoc, field: &str) -> Result<WrenchModel, ScenarioError> {
    let force = |f: &[f64; 3], t: &[f64; 3], at: &str| -> Result<DualForce, ScenarioError> {
        Ok(DualForce::new(
            vector(f, &format!("{at}.force"))?,
            vector(t, &format!("{at}.torque"))?,
        ))
    };
    match doc {
        WrenchDoc::Zero {} => Ok(WrenchModel::Zero),
        WrenchDoc::Constant { force: f, torque } => Ok(WrenchModel::Constant(force(f, torque, field)?)),
        WrenchDoc::Tabulated { points } => {
            if points.is_empty() {
                return Err(ScenarioError::invalid(format!("{field}.points"), "table is empty"));
            }
            let mut table = Vec::with_capacity(points.len());
            for (i, p) in points.iter().enumerate() {
                let at = format!("{field}.points[{i}]");
                if !p.t.is_finite() {
                    return Err(ScenarioError::invalid(format!("{at}.t"), "non-finite time"));
                }
                if let Some((prev, _)) = table.last() {
                    if p.t <= *prev {
                        return Err(ScenarioError::invalid(format!("{at}.t"), "times must increase strictly"));
                    }
                }
                table.push((p.t, force(&p.force, &p.torque, &at)?));
            }
            Ok(WrenchModel::Tabulated(table))
        }
    }
}

fn body(doc: &BodyDoc, field: &str) -> Result<(MassMatrix, WrenchModel), ScenarioError> {
    if !(doc.mass.is_finite() && doc.mass > 0.0) {
        return Err(ScenarioError::invalid(
            format!("{field}.mass"),
            format!("must be positive, got {}", doc.mass),
        ));
    }
    let j = inertia(&doc.inertia, &format!("{field}.inertia"))?;
    let mass = MassMatrix::new(doc.mass, j).map_err(|e| ScenarioError::invalid(format!("{field}.inertia"), e))?;
    Ok((mass, wrench(&doc.wrench, &format!("{field}.wrench"))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = Scenario::from_json_str(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(s.initial, ReducedState::identity());
        assert_eq!(s.system, RelativeSystem::default());
        assert_eq!(s.marker, MarkerConfig::at_origin(0));
        assert_eq!(s.dt, 1e-3);
        assert_eq!(s.steps(), 1000);
        assert_eq!(s.seed, 0);
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"{
            "schema_version": 1,
            "initial_state": {"attitude": {"axis": [1, 2, 2], "angle_deg": 33.3},
                              "position": [0.5, -1, 4], "angular_velocity": [0.1, 0, 0.2]},
            "target": {"mass": 12, "inertia": [[2, 0.1, 0], [0.1, 3, 0], [0, 0, 4]],
                       "wrench": {"type": "tabulated", "points": [{"t": 0, "torque": [0, 0, 1]}, {"t": 2}]}},
            "chaser": {"motion": {"type": "propagated", "angular_velocity": [0, 0.01, 0]},
                       "wrench": {"type": "constant", "force": [0, 0, 0.1]}},
            "marker": {"id": 7, "attitude": {"quaternion": [0.5, 0.5, 0.5, 0.5]}, "position": [0.1, 0, 0]},
            "noise": {"sigma_rot_deg": 0.5, "sigma_trans": 0.01},
            "seed": 42
        }"#;
        let s = Scenario::from_json_str(text).unwrap();
        let again = Scenario::from_json_str(&s.echo()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.hash(), again.hash());
    }

    #[test]
    fn slightly_non_unit_quaternion_is_rejected_with_path() {
        let err = Scenario::from_json_str(
            r#"{"schema_version": 1, "initial_state": {"attitude": {"quaternion": [1.001, 0, 0, 0]}}}"#,
        )
        .unwrap_err();
        match err {
            ScenarioError::Validation { field, .. } => assert_eq!(field, "initial_state.attitude.quaternion"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_keys_are_parse_errors_with_position() {
        let err = Scenario::from_json_str("{\n  \"schema_version\": 1,\n  \"colour\": 3\n}").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        assert!(Scenario::from_json_str(r#"{"schema_version": 1, "target": {"mas": 2}}"#).is_err());
        assert!(Scenario::from_json_str(
            r#"{"schema_version": 1, "target": {"wrench": {"type": "zero", "force": [1, 0, 0]}}}"#
        )
        .is_err());
        assert!(Scenario::from_json_str(
            r#"{"schema_version": 1, "marker": {"attitude": {"quaternion": [1, 0, 0, 0], "axis": [1, 0, 0]}}}"#
        )
        .is_err());
        assert!(Scenario::from_json_str(r#"{"schema_version": 1, "target": {"wrench": {"type": "zero"}}}"#).is_ok());
    }

    #[test]
    fn validation_paths() {
        let field = |text: &str| match Scenario::from_json_str(text).unwrap_err() {
            ScenarioError::Validation { field, .. } => field,
            other => panic!("{other}"),
        };
        assert_eq!(field(r#"{"schema_version": 2}"#), "schema_version");
        assert_eq!(field(r#"{"schema_version": 1, "target": {"mass": 0}}"#), "target.mass");
        assert_eq!(
            field(r#"{"schema_version": 1, "chaser": {"inertia": [1, 1, -1]}}"#),
            "chaser.inertia"
        );
        assert_eq!(
            field(r#"{"schema_version": 1, "chaser": {"wrench": {"type": "constant", "force": [1, 0, 0]}}}"#),
            "chaser.wrench"
        );
        assert_eq!(field(r#"{"schema_version": 1, "integration": {"dt": 0}}"#), "integration.dt");
        assert_eq!(
            field(r#"{"schema_version": 1, "marker": {"attitude": {"axis": [0, 0, 0], "angle_deg": 3}}}"#),
            "marker.attitude.axis"
        );
        assert_eq!(
            field(
                r#"{"schema_version": 1, "target": {"wrench": {"type": "tabulated", "points": [{"t": 1}, {"t": 1}]}}}"#
            ),
            "target.wrench.points[1].t"
        );
        assert_eq!(field(r#"{"schema_version": 1, "noise": {"sigma_trans": -1}}"#), "noise.sigma_trans");
    }
}
