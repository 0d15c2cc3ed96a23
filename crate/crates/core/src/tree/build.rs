use serde::{Deserialize, Serialize};

use super::chain::specialize_chain;
use super::node::{TreeNode, WorldTree};
use super::partition::{inherit_points, partition_bases, partition_points, stratified_cap};
use crate::error::{Error, Result};
use crate::interval::Frame;
use crate::scaffold::{ScaffoldGraph, ScenePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: u32,
    /// Point cap per depth; `None` is unbounded. Depths past the end reuse the last entry.
    pub caps: Vec<Option<usize>>,
    pub opacity_reset: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 2,
            caps: vec![None, Some(5000), Some(2000)],
            opacity_reset: 0.5,
        }
    }
}

impl TreeConfig {
    pub fn cap(&self, depth: u32) -> Option<usize> {
        let i = (depth as usize).min(self.caps.len().saturating_sub(1));
        self.caps.get(i).copied().flatten()
    }
}

/// Breadth-first construction: optimize every node of a layer, then split
/// each into two children that inherit restricted bases, capped points, and a
/// specialized copy of the ancestral chain.
///
/// A node whose interval is too short to split stays a leaf and is flagged
/// `early_leaf`. `optimize_layer` sees the whole tree and the depth to train.
pub fn build_worldtree<S, O>(
    scaffold: ScaffoldGraph,
    points: Vec<ScenePoint>,
    config: &TreeConfig,
    mut split: S,
    mut optimize_layer: O,
) -> Result<WorldTree>
where
    S: FnMut(&TreeNode) -> Result<Frame>,
    O: FnMut(&mut WorldTree, u32) -> Result<()>,
{
    let points = match config.cap(0) {
        Some(cap) => stratified_cap(points, cap),
        None => points,
    };
    let mut tree = WorldTree::new(TreeNode::root(scaffold, points), config.max_depth);
    for depth in 0..=config.max_depth {
        let layer = tree.layer(depth);
        if layer.is_empty() {
            break;
        }
        optimize_layer(&mut tree, depth)?;
        if depth == config.max_depth {
            break;
        }
        for j in layer {
            let node = &tree.nodes[&j];
            let tp = match split(node) {
                Ok(tp) => tp,
                Err(Error::IntervalTooShort { .. }) => {
                    tree.nodes.get_mut(&j).expect("layer member").early_leaf = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let (left_bases, right_bases) = partition_bases(&node.scaffold, tp)?;
            let (left_points, right_points) = partition_points(&node.points, tp);
            let cap = config.cap(depth + 1).unwrap_or(usize::MAX);
            let left = TreeNode::new(
                2 * j,
                left_bases,
                inherit_points(left_points, cap, config.opacity_reset),
                specialize_chain(&tree, 2 * j)?,
            );
            let right = TreeNode::new(
                2 * j + 1,
                right_bases,
                inherit_points(right_points, cap, config.opacity_reset),
                specialize_chain(&tree, 2 * j + 1)?,
            );
            tree.nodes.insert(2 * j, left);
            tree.nodes.insert(2 * j + 1, right);
        }
    }
    Ok(tree)
}
