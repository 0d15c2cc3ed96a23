use super::node::{Level, TreeNode, WorldTree};
use crate::error::{Error, Result};
use crate::interval::Frame;
use crate::scaffold::{apply_to_point, DeformationField, DeformedPoint};

/// Ancestors of `j`, nearest first: `⌊j/2⌋, ⌊j/4⌋, …, 1`.
pub fn ancestral_chain_indices(j: usize) -> Vec<usize> {
    assert!(j >= 1, "node indices start at 1");
    std::iter::successors(Some(j / 2), |&k| Some(k / 2))
        .take_while(|&k| k >= 1)
        .collect()
}

/// Builds node `j`'s private ancestral chain from its (already optimized)
/// parent: the parent's current state followed by the parent's own chain.
/// The copies are deep, so training them never touches the ancestors.
pub fn specialize_chain(tree: &WorldTree, j: usize) -> Result<Vec<super::AncestorCopy>> {
    if j <= 1 {
        return Ok(Vec::new());
    }
    for k in ancestral_chain_indices(j) {
        tree.node(k)?;
    }
    let parent = tree.node(j / 2)?;
    let mut chain = Vec::with_capacity(parent.chain.len() + 1);
    chain.push(parent.as_ancestor());
    chain.extend(parent.chain.iter().cloned());
    Ok(chain)
}

/// Deforms every point of one level to `target`.
pub fn deform_level(level: Level<'_>, target: Frame) -> Result<Vec<DeformedPoint>> {
    let field = DeformationField::new(level.scaffold);
    level
        .points
        .iter()
        .map(|p| {
            let w = field.query(p.position, p.canonical_time, target)?;
            Ok(apply_to_point(p, &w, target, level.source_index))
        })
        .collect()
}

/// Full set of points visible in node `j` at frame `t`: its own points plus
/// every chain copy's points, each deformed by the scaffold it came with.
pub fn assemble_node(node: &TreeNode, t: Frame) -> Result<Vec<DeformedPoint>> {
    node.interval.check(t)?;
    let mut out = Vec::new();
    for level in node.levels() {
        out.extend(deform_level(level, t)?);
    }
    Ok(out)
}

pub fn assemble_points(tree: &WorldTree, j: usize, t: Frame) -> Result<Vec<DeformedPoint>> {
    let node = tree.nodes.get(&j).ok_or(Error::MissingAncestor(j))?;
    assemble_node(node, t)
}
