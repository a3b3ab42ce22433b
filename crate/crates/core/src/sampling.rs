//! Random draws of quaternions, poses and states for sweeps and checks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, UnitBall};

use crate::dualquat::{DualPose, TranslationFrame};
use crate::dynamics::{state_embed, ReducedState, RelativeState};
use crate::quat::{Quaternion, UnitQuaternion, Vec3};

/// Bounds for random relative states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBounds {
    pub max_position: f64,
    pub max_angular_rate: f64,
    pub max_velocity: f64,
}

impl Default for StateBounds {
    fn default() -> Self {
        Self {
            max_position: 10.0,
            max_angular_rate: 10.0,
            max_velocity: 10.0,
        }
    }
}

/// Uniform on the unit 3-sphere (normalized Gaussian 4-vector).
pub fn unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Ok(u) = UnitQuaternion::normalize(q) {
            return u;
        }
    }
}

/// Uniform in the closed ball of the given radius.
pub fn ball<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Vec3 {
    Vec3::from(<UnitBall as Distribution<[f64; 3]>>::sample(&UnitBall, rng)) * radius
}

pub fn dual_pose<R: Rng + ?Sized>(rng: &mut R, max_position: f64) -> DualPose {
    let q = unit_quaternion(rng);
    DualPose::from_rotation_translation(&q, &ball(rng, max_position), TranslationFrame::Parent)
}

pub fn reduced_state<R: Rng + ?Sized>(rng: &mut R, bounds: &StateBounds) -> ReducedState {
    ReducedState {
        q: unit_quaternion(rng),
        r: ball(rng, bounds.max_position),
        omega: ball(rng, bounds.max_angular_rate),
        v: ball(rng, bounds.max_velocity),
    }
}

pub fn relative_state<R: Rng + ?Sized>(rng: &mut R, bounds: &StateBounds) -> RelativeState {
    state_embed(&reduced_state(rng, bounds))
}
