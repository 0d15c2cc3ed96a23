//! Motion bases, the KNN scaffold graph and the deformation field built on it.

pub(crate) mod basis;
mod field;
mod graph;
mod point;

pub use basis::{pairwise_max_distance, MotionBasis};
pub(crate) use field::apply_to_point;
pub use field::{deform_point, deform_query, skin_weight, Anchor, DeformationField};
pub use graph::{build_knn_graph, nearest_basis, ScaffoldGraph, FALLBACK_RADIUS, POSE_PARAMS};
pub use point::{DeformedPoint, ScenePoint};
