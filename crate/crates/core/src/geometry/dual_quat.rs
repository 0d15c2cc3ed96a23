use std::ops::{Add, Mul};

use super::{Quaternion, Real, SE3Transform, Vec3};
use crate::error::{Error, Result};

/// Dual quaternion `real + ε·dual`, used to blend rigid transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualQuaternion<S = f64> {
    pub real: Quaternion<S>,
    pub dual: Quaternion<S>,
}

impl<S: Real> DualQuaternion<S> {
    /// Encodes the rigid motion `(rotation, translation)`; `dual = ½·t·q`.
    pub fn from_rigid(rotation: Quaternion<S>, translation: Vec3<S>) -> Self {
        Self {
            real: rotation,
            dual: (Quaternion::pure(translation) * rotation).scale(S::constant(0.5)),
        }
    }

    pub fn scale(self, k: S) -> Self {
        Self {
            real: self.real.scale(k),
            dual: self.dual.scale(k),
        }
    }

    /// Converts back to a rigid transform, normalizing first. The scalar part
    /// of `2·dual·real*` (non-rigid residue of a blended sum) is discarded.
    pub fn to_se3(self) -> SE3Transform<S> {
        let inv = S::one() / self.real.norm();
        let real = self.real.scale(inv);
        let dual = self.dual.scale(inv);
        let t = (dual * real.conjugate()).vector() * 2.0;
        SE3Transform::new(real, t)
    }
}

impl<S: Real> Add for DualQuaternion<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            real: self.real + o.real,
            dual: self.dual + o.dual,
        }
    }
}

impl<S: Real> Mul for DualQuaternion<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            real: self.real * o.real,
            dual: self.real * o.dual + self.dual * o.real,
        }
    }
}

/// Weighted dual quaternion blend of already-converted transforms.
///
/// Weights are normalized to sum one and every real part is sign-aligned with
/// the first before summation.
pub fn blend_dual_quaternions<S: Real>(dqs: &[DualQuaternion<S>], weights: &[S]) -> Result<SE3Transform<S>> {
    if dqs.is_empty() || dqs.len() != weights.len() {
        return Err(Error::EmptyBlendSet);
    }
    let mut total = S::zero();
    for &w in weights {
        total = total + w;
    }
    if weights.iter().all(|w| w.value() == 0.0) || total.value() <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let anchor = dqs[0].real.value();
    let mut acc: Option<DualQuaternion<S>> = None;
    for (dq, &w) in dqs.iter().zip(weights) {
        let aligned = if anchor.dot(dq.real.value()) < 0.0 { dq.scale(-S::one()) } else { *dq };
        let term = aligned.scale(w / total);
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    Ok(acc.expect("non-empty").to_se3())
}

/// Dual quaternion blending of rigid transforms.
pub fn dqb_blend<S: Real>(transforms: &[SE3Transform<S>], weights: &[S]) -> Result<SE3Transform<S>> {
    if transforms.is_empty() || transforms.len() != weights.len() {
        return Err(Error::EmptyBlendSet);
    }
    let dqs: Vec<_> = transforms.iter().map(SE3Transform::to_dual_quaternion).collect();
    blend_dual_quaternions(&dqs, weights)
}
