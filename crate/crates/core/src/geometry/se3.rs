use serde::{Deserialize, Serialize};

use super::{DualQuaternion, Quaternion, Real, Vec3};

/// Rigid transform `p ↦ R p + t`, rotation stored as a unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SE3Transform<S = f64> {
    rotation: Quaternion<S>,
    translation: Vec3<S>,
}

impl<S: Real> SE3Transform<S> {
    /// Builds a transform, normalizing `rotation`.
    pub fn new(rotation: Quaternion<S>, translation: Vec3<S>) -> Self {
        Self {
            rotation: rotation.normalize(),
            translation,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Quaternion::identity(),
            translation: Vec3::zero(),
        }
    }

    pub fn from_translation(translation: Vec3<S>) -> Self {
        Self {
            rotation: Quaternion::identity(),
            translation,
        }
    }

    pub fn rotation(&self) -> Quaternion<S> {
        self.rotation
    }

    pub fn translation(&self) -> Vec3<S> {
        self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation.rotate(other.translation) + self.translation,
        )
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.conjugate();
        Self {
            rotation: inv,
            translation: -inv.rotate(self.translation),
        }
    }

    pub fn apply(&self, p: Vec3<S>) -> Vec3<S> {
        self.rotation.rotate(p) + self.translation
    }

    pub fn to_dual_quaternion(&self) -> DualQuaternion<S> {
        DualQuaternion::from_rigid(self.rotation, self.translation)
    }

    pub fn value(&self) -> SE3Transform<f64> {
        SE3Transform {
            rotation: self.rotation.value(),
            translation: self.translation.value(),
        }
    }
}

impl SE3Transform<f64> {
    pub fn from_rotation(rotation: Quaternion) -> Self {
        Self::new(rotation, Vec3::zero())
    }

    /// Largest absolute componentwise difference, comparing rotations up to sign.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.rotation.to_array();
        let mut b = other.rotation.to_array();
        if self.rotation.dot(other.rotation) < 0.0 {
            b.iter_mut().for_each(|c| *c = -*c);
        }
        let rot = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs());
        let tr = self
            .translation
            .to_array()
            .into_iter()
            .zip(other.translation.to_array())
            .map(|(x, y)| (x - y).abs());
        rot.chain(tr).fold(0.0, f64::max)
    }
}
