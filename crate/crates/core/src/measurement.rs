//! Single fiducial-marker relative pose measurement.
//!
//! A marker M is rigidly attached to the target with known pose `q̂_{M/T}`;
//! one detection yields the marker pose in the camera frame,
//! `y = q̂_{M/C} = q̂_{T/C} q̂_{M/T}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::dualquat::{dqmul, DualPose, DualQuaternion, TranslationFrame, UnitDualQuaternion};
use crate::dynamics::RelativeState;
use crate::error::AlgebraError;
use crate::quat::{UnitQuaternion, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerConfig {
    pub id: u32,
    /// `q̂_{M/T}`.
    pub pose_in_target: DualPose,
}

impl MarkerConfig {
    pub fn new(id: u32, pose_in_target: DualPose) -> Self {
        Self { id, pose_in_target }
    }

    /// Marker at the target origin with the target's orientation.
    pub fn at_origin(id: u32) -> Self {
        Self::new(id, DualPose::identity())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseMeasurement {
    /// `q̂_{M/C}`.
    pub value: DualPose,
    pub timestamp: f64,
}

/// Measurement function on raw dual-quaternion components; no validation.
pub fn measure_raw(pose: &DualQuaternion, marker: &DualQuaternion) -> DualQuaternion {
    dqmul(pose, marker)
}

pub fn measure(x: &RelativeState, marker: &MarkerConfig, timestamp: f64) -> PoseMeasurement {
    let value = UnitDualQuaternion::new_unchecked(measure_raw(&x.pose, &marker.pose_in_target));
    PoseMeasurement { value, timestamp }
}

/// Detection noise: standard deviations of the rotation-error angle (rad)
/// and the translation-error magnitude (m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseNoise {
    pub sigma_rot: f64,
    pub sigma_trans: f64,
}

impl PoseNoise {
    pub fn is_zero(&self) -> bool {
        self.sigma_rot == 0.0 && self.sigma_trans == 0.0
    }
}

/// Draws a marker-frame perturbation pose. Each of rotation and translation
/// gets an isotropic direction and a signed Gaussian magnitude, so the RMS
/// rotation angle is `sigma_rot` and the RMS translation norm `sigma_trans`.
pub fn sample_perturbation<R: Rng + ?Sized>(noise: &PoseNoise, rng: &mut R) -> DualPose {
    let axis = Vec3::from(UnitSphere.sample(rng));
    let angle = Normal::new(0.0, noise.sigma_rot)
        .map(|d| d.sample(rng))
        .unwrap_or(0.0);
    let dir = Vec3::from(UnitSphere.sample(rng));
    let dist = Normal::new(0.0, noise.sigma_trans)
        .map(|d| d.sample(rng))
        .unwrap_or(0.0);
    // axis has unit norm to rounding, well inside the axis tolerance
    let q = UnitQuaternion::from_axis_angle(angle, &axis).unwrap_or_else(|_| UnitQuaternion::identity());
    DualPose::from_rotation_translation(&q, &(dir * dist), TranslationFrame::Child)
}

/// `measure` right-multiplied by a random marker-frame perturbation drawn
/// from `rng`, then re-projected to unit.
pub fn measure_noisy_with<R: Rng + ?Sized>(
    x: &RelativeState,
    marker: &MarkerConfig,
    timestamp: f64,
    noise: &PoseNoise,
    rng: &mut R,
) -> Result<PoseMeasurement, AlgebraError> {
    check_noise(noise)?;
    let clean = measure(x, marker, timestamp);
    if noise.is_zero() {
        return Ok(clean);
    }
    let delta = sample_perturbation(noise, rng);
    let value = UnitDualQuaternion::renormalize(dqmul(&clean.value, &delta))?;
    Ok(PoseMeasurement { value, timestamp })
}

/// Seeded variant of [`measure_noisy_with`]; identical seeds give identical
/// output.
pub fn measure_noisy(
    x: &RelativeState,
    marker: &MarkerConfig,
    timestamp: f64,
    noise: &PoseNoise,
    seed: u64,
) -> Result<PoseMeasurement, AlgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    measure_noisy_with(x, marker, timestamp, noise, &mut rng)
}

fn check_noise(noise: &PoseNoise) -> Result<(), AlgebraError> {
    let ok = |s: f64| s.is_finite() && s >= 0.0;
    if ok(noise.sigma_rot) && ok(noise.sigma_trans) {
        Ok(())
    } else {
        Err(AlgebraError::NonFinite)
    }
}
