use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::TimeInterval;
use crate::optimize::LossRecord;
use crate::scaffold::{ScaffoldGraph, ScenePoint};

/// A node's private, independently trainable copy of one ancestor's state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncestorCopy {
    pub source_index: usize,
    pub interval: TimeInterval,
    pub scaffold: ScaffoldGraph,
    pub points: Vec<ScenePoint>,
}

/// Tree node `j`: interval, own scaffold and points, and its ancestral chain
/// (nearest ancestor first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub index: usize,
    pub depth: u32,
    pub interval: TimeInterval,
    pub scaffold: ScaffoldGraph,
    pub points: Vec<ScenePoint>,
    pub chain: Vec<AncestorCopy>,
    /// Set when the node could not be split before reaching the maximum depth.
    pub early_leaf: bool,
    pub final_loss: Option<f64>,
    /// Accumulated gradient norm of the own scaffold's poses, per interval frame.
    pub frame_gradients: Vec<f64>,
    pub history: Vec<LossRecord>,
}

/// One scaffold and the points it deforms, as seen from a node: either the
/// node's own state or one of its chain copies.
#[derive(Debug, Clone, Copy)]
pub struct Level<'a> {
    pub source_index: usize,
    pub interval: TimeInterval,
    pub scaffold: &'a ScaffoldGraph,
    pub points: &'a [ScenePoint],
}

pub fn depth_of(index: usize) -> u32 {
    debug_assert!(index >= 1);
    usize::BITS - 1 - index.leading_zeros()
}

impl TreeNode {
    pub fn root(scaffold: ScaffoldGraph, points: Vec<ScenePoint>) -> Self {
        Self::new(1, scaffold, points, Vec::new())
    }

    pub fn new(index: usize, scaffold: ScaffoldGraph, points: Vec<ScenePoint>, chain: Vec<AncestorCopy>) -> Self {
        let interval = scaffold.frames();
        Self {
            index,
            depth: depth_of(index),
            interval,
            frame_gradients: vec![0.0; interval.len()],
            scaffold,
            points,
            chain,
            early_leaf: false,
            final_loss: None,
            history: Vec::new(),
        }
    }

    /// Own state first, then chain copies nearest-first.
    pub fn levels(&self) -> impl Iterator<Item = Level<'_>> {
        std::iter::once(Level {
            source_index: self.index,
            interval: self.interval,
            scaffold: &self.scaffold,
            points: &self.points,
        })
        .chain(self.chain.iter().map(|c| Level {
            source_index: c.source_index,
            interval: c.interval,
            scaffold: &c.scaffold,
            points: &c.points,
        }))
    }

    /// Snapshot of this node's state for handing down to a child.
    pub fn as_ancestor(&self) -> AncestorCopy {
        AncestorCopy {
            source_index: self.index,
            interval: self.interval,
            scaffold: self.scaffold.clone(),
            points: self.points.clone(),
        }
    }

    /// `node=<j> depth=<d> interval=<L>,<R> bases=<n> points=<n> chain=<k1,k2,...>`
    pub fn inspect_line(&self) -> String {
        let chain: Vec<String> = self.chain.iter().map(|c| c.source_index.to_string()).collect();
        format!(
            "node={} depth={} interval={},{} bases={} points={} chain={}",
            self.index,
            self.depth,
            self.interval.left,
            self.interval.right,
            self.scaffold.len(),
            self.points.len(),
            chain.join(",")
        )
    }
}

/// Heap-indexed binary tree of nodes (root 1, children `2j`, `2j + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldTree {
    pub nodes: BTreeMap<usize, TreeNode>,
    pub max_depth: u32,
    /// Static background points; never deformed.
    pub background: Vec<ScenePoint>,
}

impl WorldTree {
    pub fn new(root: TreeNode, max_depth: u32) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(1, root);
        Self {
            nodes,
            max_depth,
            background: Vec::new(),
        }
    }

    pub fn node(&self, j: usize) -> Result<&TreeNode> {
        self.nodes.get(&j).ok_or(Error::MissingAncestor(j))
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[&1]
    }

    pub fn interval(&self) -> TimeInterval {
        self.root().interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Indices present at depth `d`, ascending.
    pub fn layer(&self, d: u32) -> Vec<usize> {
        let lo = 1usize << d;
        self.nodes.range(lo..lo << 1).map(|(&j, _)| j).collect()
    }

    pub fn is_leaf(&self, j: usize) -> bool {
        !self.nodes.contains_key(&(2 * j)) && !self.nodes.contains_key(&(2 * j + 1))
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.values().filter(|n| self.is_leaf(n.index))
    }

    /// The leaf whose interval contains `t`.
    pub fn leaf_for(&self, t: u32) -> Result<&TreeNode> {
        let mut j = 1;
        let root = self.root();
        root.interval.check(t)?;
        loop {
            let left = 2 * j;
            match (self.nodes.get(&left), self.nodes.get(&(left + 1))) {
                (Some(l), _) if l.interval.contains(t) => j = left,
                (_, Some(r)) if r.interval.contains(t) => j = left + 1,
                _ => return Ok(&self.nodes[&j]),
            }
        }
    }

    pub fn inspect(&self) -> String {
        let mut out = String::new();
        for node in self.nodes.values() {
            let _ = writeln!(out, "{}", node.inspect_line());
        }
        out
    }
}
