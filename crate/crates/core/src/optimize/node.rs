use serde::{Deserialize, Serialize};

use super::autodiff::Tape;
use super::gradient::{finite_difference_gradient, reverse_mode_on, GradientMode, Objective};
use super::loss::{
    acc_sum, arap_frame_pairs, arap_sums, track_error_sum, vel_sum, LossComponents, LossRecord, LossWeights, Supervision,
};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::geometry::Real;
use crate::interval::{Frame, TimeInterval};
use crate::scaffold::{ScaffoldGraph, ScenePoint, POSE_PARAMS};
use crate::scene::TrackSet;
use crate::tree::{TreeNode, WorldTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    /// Gradient steps per node at each depth; deeper layers reuse the last entry.
    pub steps_per_layer: Vec<usize>,
    pub learning_rate: f64,
    pub seed: u64,
    pub gradient_mode: GradientMode,
    pub fd_epsilon: f64,
    /// Train chain copies jointly with the node's own scaffold.
    pub train_chain: bool,
    /// Keep the track term for nodes below the root.
    pub child_track_loss: bool,
    pub exec: ExecMode,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            steps_per_layer: vec![400, 200, 200],
            learning_rate: 20.0,
            seed: 0,
            gradient_mode: GradientMode::Provided,
            fd_epsilon: 1e-5,
            train_chain: true,
            child_track_loss: true,
            exec: ExecMode::Parallel,
        }
    }
}

impl OptimConfig {
    pub fn steps_for(&self, depth: u32) -> usize {
        let i = (depth as usize).min(self.steps_per_layer.len().saturating_sub(1));
        self.steps_per_layer.get(i).copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning_rate = {}", self.learning_rate)));
        }
        if !(self.fd_epsilon > 0.0 && self.fd_epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("fd_epsilon = {}", self.fd_epsilon)));
        }
        if self.steps_per_layer.is_empty() {
            return Err(Error::InvalidConfig("steps_per_layer is empty".into()));
        }
        Ok(())
    }
}

struct Slot<'a> {
    scaffold: &'a ScaffoldGraph,
    points: &'a [ScenePoint],
    /// Start of this scaffold's block in the flat parameters; `None` when frozen.
    offset: Option<usize>,
}

/// Training objective of one node over its own scaffold and, optionally,
/// its chain copies. Parameters are the trainable scaffolds' flat poses,
/// own scaffold first.
pub struct NodeObjective<'a> {
    slots: Vec<Slot<'a>>,
    supervision: Supervision<'a>,
    window: TimeInterval,
    pairs: Vec<(Frame, Frame)>,
    weights: LossWeights,
    param_count: usize,
}

impl<'a> NodeObjective<'a> {
    pub fn new(node: &'a TreeNode, tracks: &'a TrackSet, weights: LossWeights, train_chain: bool, seed: u64) -> Self {
        let mut slots = Vec::with_capacity(node.chain.len() + 1);
        let mut offset = 0;
        for (i, level) in node.levels().enumerate() {
            let trainable = i == 0 || train_chain;
            slots.push(Slot {
                scaffold: level.scaffold,
                points: level.points,
                offset: trainable.then_some(offset),
            });
            if trainable {
                offset += level.scaffold.param_count();
            }
        }
        Self {
            slots,
            supervision: Supervision::new(tracks),
            window: node.interval,
            pairs: arap_frame_pairs(node.interval, seed),
            weights,
            param_count: offset,
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn weights(&self) -> &LossWeights {
        &self.weights
    }

    /// Current flat parameters of the trainable scaffolds.
    pub fn initial_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count);
        for slot in self.slots.iter().filter(|s| s.offset.is_some()) {
            out.extend(slot.scaffold.to_params());
        }
        out
    }

    /// Loss components at `params`. The track term pools every prediction
    /// of every level; regularizers are averaged over trainable scaffolds.
    pub fn components<S: Real>(&self, params: &[S]) -> Result<LossComponents<S>> {
        let mut track = S::zero();
        let mut track_count = 0usize;
        let mut regs = LossComponents::<S>::zero();
        let mut trainable = 0usize;
        for slot in &self.slots {
            let graph = match slot.offset {
                Some(o) => slot.scaffold.with_params(&params[o..o + slot.scaffold.param_count()]),
                None if self.weights.track > 0.0 => {
                    let fixed: Vec<S> = slot.scaffold.to_params().into_iter().map(S::constant).collect();
                    slot.scaffold.with_params(&fixed)
                }
                None => continue,
            };
            if self.weights.track > 0.0 {
                let (sum, count) = track_error_sum(&graph, slot.points, &self.supervision, self.window)?;
                track = track + sum;
                track_count += count;
            }
            if slot.offset.is_none() {
                continue;
            }
            trainable += 1;
            if self.weights.arap > 0.0 {
                let (dist, local, count) = arap_sums(&graph, &self.pairs);
                if count > 0 {
                    regs.arap = regs.arap + (dist + local) / count as f64;
                }
            }
            if self.weights.vel > 0.0 {
                let (sum, count) = vel_sum(&graph, self.window);
                if count > 0 {
                    regs.vel = regs.vel + sum / count as f64;
                }
            }
            if self.weights.acc > 0.0 {
                let (sum, count) = acc_sum(&graph, self.window);
                if count > 0 {
                    regs.acc = regs.acc + sum / count as f64;
                }
            }
        }
        if self.weights.track > 0.0 && track_count == 0 {
            return Err(Error::NoVisibleObservations {
                left: self.window.left,
                right: self.window.right,
            });
        }
        let n = trainable.max(1) as f64;
        Ok(LossComponents {
            track: if track_count == 0 { S::zero() } else { track / track_count as f64 },
            arap: regs.arap / n,
            acc: regs.acc / n,
            vel: regs.vel / n,
        })
    }
}

impl Objective for NodeObjective<'_> {
    fn evaluate<S: Real>(&self, params: &[S]) -> Result<S> {
        Ok(self.components(params)?.weighted(&self.weights))
    }
}

fn renormalize_quaternions(params: &mut [f64]) {
    for pose in params.chunks_exact_mut(POSE_PARAMS) {
        let q = &mut pose[3..7];
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 && n.is_finite() {
            q.iter_mut().for_each(|v| *v /= n);
        } else {
            q.copy_from_slice(&[1.0, 0.0, 0.0, 0.0]);
        }
    }
}

/// Plain gradient descent on the node's own scaffold (and its chain copies
/// when `config.train_chain`), renormalizing quaternions after every step.
///
/// Records one loss row per step plus a final row, the final loss, and the
/// per-frame gradient norm of the own scaffold summed over steps.
pub fn optimize_node(
    node: &TreeNode,
    tracks: &TrackSet,
    weights: &LossWeights,
    config: &OptimConfig,
    steps: usize,
    seed: u64,
) -> Result<TreeNode> {
    let mut out = node.clone();
    if steps == 0 {
        return Ok(out);
    }
    let mut w = *weights;
    if !config.child_track_loss && node.depth > 0 {
        w.track = 0.0;
    }
    let objective = NodeObjective::new(node, tracks, w, config.train_chain, seed);
    let mut params = objective.initial_params();
    let own = &node.scaffold;
    let frames = node.interval;

    let mut tape = Tape::new();
    for step in 0..=steps {
        let (total, grad, comps) = match config.gradient_mode {
            GradientMode::Provided => reverse_mode_on(&mut tape, &params, |_, vars| {
                let c = objective.components(vars)?;
                Ok((c.weighted(&w), c.value()))
            })?,
            GradientMode::FiniteDifference => {
                let c = objective.components(&params)?;
                let total = c.weighted(&w);
                if !total.is_finite() {
                    return Err(Error::NonFiniteObjective(total));
                }
                let grad = if step < steps {
                    finite_difference_gradient(&objective, &params, config.fd_epsilon, config.exec)?
                } else {
                    Vec::new()
                };
                (total, grad, c)
            }
        };
        out.history.push(LossRecord {
            step,
            node: node.index,
            total,
            components: comps,
        });
        if step == steps {
            out.final_loss = Some(total);
            break;
        }
        for (f, t) in frames.frames().enumerate() {
            let mut sq = 0.0;
            for b in 0..own.len() {
                let o = own.param_offset(b, t);
                sq += grad[o..o + POSE_PARAMS].iter().map(|g| g * g).sum::<f64>();
            }
            out.frame_gradients[f] += sq.sqrt();
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        renormalize_quaternions(&mut params);
    }

    let mut offset = 0;
    let n = out.scaffold.param_count();
    out.scaffold.set_params(&params[..n]);
    offset += n;
    if config.train_chain {
        for copy in &mut out.chain {
            let n = copy.scaffold.param_count();
            copy.scaffold.set_params(&params[offset..offset + n]);
            offset += n;
        }
    }
    Ok(out)
}

/// Optimizes every node at `depth` with seed `config.seed ^ j`. Nodes are
/// independent, so the result does not depend on `config.exec`.
pub fn optimize_layer(tree: &mut WorldTree, depth: u32, tracks: &TrackSet, weights: &LossWeights, config: &OptimConfig) -> Result<()> {
    let steps = config.steps_for(depth);
    let nodes: Vec<&TreeNode> = tree.layer(depth).into_iter().map(|j| &tree.nodes[&j]).collect();
    let results = config.exec.map(nodes, |n| {
        optimize_node(n, tracks, weights, config, steps, config.seed ^ n.index as u64)
    });
    for r in results {
        let node = r?;
        tree.nodes.insert(node.index, node);
    }
    Ok(())
}
