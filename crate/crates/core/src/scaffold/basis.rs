use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Real, SE3Transform, Vec3};
use crate::interval::{Frame, TimeInterval};

/// One motion basis: a rigid pose per frame over a contiguous range, plus the
/// support radius used by its skinning weight (squared scene units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionBasis<S = f64> {
    start: Frame,
    poses: Vec<SE3Transform<S>>,
    radius: f64,
}

impl<S: Real> MotionBasis<S> {
    pub fn new(start: Frame, poses: Vec<SE3Transform<S>>, radius: f64) -> Result<Self> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::NonPositiveRadius(radius));
        }
        if poses.is_empty() {
            return Err(Error::IntervalTooShort { left: start, right: start });
        }
        Ok(Self { start, poses, radius })
    }

    pub fn frames(&self) -> TimeInterval {
        TimeInterval {
            left: self.start,
            right: self.start + self.poses.len() as Frame - 1,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub(crate) fn set_radius(&mut self, radius: f64) {
        debug_assert!(radius > 0.0);
        self.radius = radius;
    }

    pub fn poses(&self) -> &[SE3Transform<S>] {
        &self.poses
    }

    pub fn pose(&self, t: Frame) -> Result<&SE3Transform<S>> {
        self.frames().check(t)?;
        Ok(&self.poses[(t - self.start) as usize])
    }

    /// Pose lookup for frames already validated against [`Self::frames`].
    pub(crate) fn pose_unchecked(&self, t: Frame) -> &SE3Transform<S> {
        &self.poses[(t - self.start) as usize]
    }

    pub fn translation(&self, t: Frame) -> Result<Vec3<S>> {
        self.pose(t).map(|p| p.translation())
    }

    /// Copy restricted to `window`, which must lie inside the basis range.
    pub fn restrict(&self, window: TimeInterval) -> Result<Self> {
        let range = self.frames();
        range.check(window.left)?;
        range.check(window.right)?;
        let a = (window.left - self.start) as usize;
        let b = (window.right - self.start) as usize;
        Ok(Self {
            start: window.left,
            poses: self.poses[a..=b].to_vec(),
            radius: self.radius,
        })
    }

    pub fn value(&self) -> MotionBasis<f64> {
        MotionBasis {
            start: self.start,
            poses: self.poses.iter().map(SE3Transform::value).collect(),
            radius: self.radius,
        }
    }
}

/// `max_t ‖T_t(a) − T_t(b)‖` over the frames both bases cover.
pub fn pairwise_max_distance<S: Real>(a: &MotionBasis<S>, b: &MotionBasis<S>) -> Result<f64> {
    let shared = a.frames().intersect(&b.frames()).ok_or(Error::DisjointFrameRanges)?;
    Ok(shared
        .frames()
        .map(|t| {
            (a.pose_unchecked(t).translation().value() - b.pose_unchecked(t).translation().value()).norm()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn track_basis(start: Frame, points: &[[f64; 3]]) -> MotionBasis {
        let poses = points
            .iter()
            .map(|&p| SE3Transform::from_translation(Vec3::from(p)))
            .collect();
        MotionBasis::new(start, poses, 1.0).unwrap()
    }

    #[test]
    fn identical_trajectories_have_zero_distance() {
        let a = track_basis(1, &[[0.0, 1.0, 2.0], [3.0, 1.0, 0.0]]);
        assert_eq!(pairwise_max_distance(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn static_versus_moving() {
        let a = track_basis(1, &[[0.0; 3]; 5]);
        let b = track_basis(1, &(1..=5).map(|x| [x as f64, 0.0, 0.0]).collect::<Vec<_>>());
        assert_eq!(pairwise_max_distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn disjoint_ranges_rejected() {
        let a = track_basis(1, &[[0.0; 3]; 3]);
        let b = track_basis(10, &[[0.0; 3]; 3]);
        assert_eq!(pairwise_max_distance(&a, &b), Err(Error::DisjointFrameRanges));
    }

    #[test]
    fn restrict_keeps_requested_window() {
        let b = track_basis(1, &(1..=10).map(|x| [x as f64, 0.0, 0.0]).collect::<Vec<_>>());
        let r = b.restrict(TimeInterval::new(5, 10).unwrap()).unwrap();
        assert_eq!(r.frames(), TimeInterval::new(5, 10).unwrap());
        assert_eq!(r.translation(5).unwrap().x, 5.0);
        assert!(b.restrict(TimeInterval::new(5, 11).unwrap()).is_err());
    }

    #[test]
    fn radius_must_be_positive() {
        let poses = vec![SE3Transform::<f64>::identity()];
        assert_eq!(MotionBasis::new(0, poses.clone(), 0.0), Err(Error::NonPositiveRadius(0.0)));
        assert!(MotionBasis::new(0, poses, f64::NAN).is_err());
    }
}
