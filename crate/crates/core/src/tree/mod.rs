//! Temporal tree: nodes own a time interval, a scaffold restricted to it,
//! the points born inside it, and private copies of their ancestors.

mod build;
mod chain;
mod node;
mod partition;

pub use build::{build_worldtree, TreeConfig};
pub use chain::{ancestral_chain_indices, assemble_node, assemble_points, deform_level, specialize_chain};
pub use node::{depth_of, AncestorCopy, Level, TreeNode, WorldTree};
pub use partition::{
    child_intervals, inherit_points, partition_bases, partition_point_binary, partition_points, stratified_cap,
};
