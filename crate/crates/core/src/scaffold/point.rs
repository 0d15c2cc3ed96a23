use serde::{Deserialize, Serialize};

use crate::geometry::{Quaternion, Vec3};
use crate::interval::Frame;

/// Point proxy for a Gaussian primitive, defined at its canonical frame.
///
/// Scale and color are carried through deformation but never fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePoint {
    pub id: u64,
    pub position: Vec3,
    pub rotation: Quaternion,
    pub scale: Vec3,
    pub opacity: f64,
    pub color: [f64; 3],
    pub canonical_time: Frame,
}

impl ScenePoint {
    pub fn new(id: u64, position: Vec3, canonical_time: Frame) -> Self {
        Self {
            id,
            position,
            rotation: Quaternion::identity(),
            scale: Vec3::new(0.01, 0.01, 0.01),
            opacity: 1.0,
            color: [0.5, 0.5, 0.5],
            canonical_time,
        }
    }
}

/// A [`ScenePoint`] carried to a target frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedPoint {
    pub id: u64,
    pub position: Vec3,
    pub rotation: Quaternion,
    pub scale: Vec3,
    pub opacity: f64,
    pub color: [f64; 3],
    pub time: Frame,
    /// Tree node whose scaffold produced this point (0 for static background).
    pub source_node: usize,
}
