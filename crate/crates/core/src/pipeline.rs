//! End-to-end fitting: classification, held-out split, initialization and
//! breadth-first tree construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{optimize_layer, LossWeights, OptimConfig, SplitStrategy};
use crate::scene::{classify_static, evaluate, init_points, init_scaffold, EvalReport, TrackSet};
use crate::tree::{build_worldtree, TreeConfig, WorldTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub tree: TreeConfig,
    pub k: usize,
    pub n_bases: usize,
    pub weights: LossWeights,
    pub optim: OptimConfig,
    pub split: SplitStrategy,
    pub static_epsilon: f64,
    /// Every `heldout_stride`-th dynamic track is withheld; 0 keeps all.
    pub heldout_stride: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tree: TreeConfig::default(),
            k: 8,
            n_bases: 32,
            weights: LossWeights::default(),
            optim: OptimConfig::default(),
            split: SplitStrategy::Binary,
            static_epsilon: 0.05,
            heldout_stride: 5,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k == 0 || self.k > self.n_bases {
            return bad(format!("k = {} (need 1 <= k <= n_bases = {})", self.k, self.n_bases));
        }
        if !(self.static_epsilon > 0.0 && self.static_epsilon.is_finite()) {
            return bad(format!("static_epsilon = {}", self.static_epsilon));
        }
        if !(self.tree.opacity_reset > 0.0 && self.tree.opacity_reset <= 1.0) {
            return bad(format!("opacity_reset = {} (need 0 < v <= 1)", self.tree.opacity_reset));
        }
        if self.tree.caps.is_empty() || self.tree.caps.contains(&Some(0)) {
            return bad("caps must be non-empty and positive".into());
        }
        if self.optim.steps_per_layer.len() != self.tree.max_depth as usize + 1 {
            return bad(format!(
                "steps_per_layer has {} entries, depth {} needs {}",
                self.optim.steps_per_layer.len(),
                self.tree.max_depth,
                self.tree.max_depth + 1
            ));
        }
        self.weights.validate()?;
        self.optim.validate()
    }

    /// Same configuration at another depth, reusing the per-layer settings.
    pub fn with_depth(&self, depth: u32) -> Self {
        let mut out = self.clone();
        out.tree.max_depth = depth;
        let last = *self.optim.steps_per_layer.last().unwrap_or(&0);
        out.optim.steps_per_layer.resize(depth as usize + 1, last);
        out
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub tree: WorldTree,
    /// Dynamic training tracks.
    pub train: TrackSet,
    pub heldout: TrackSet,
}

impl FitOutput {
    pub fn evaluate(&self) -> Result<EvalReport> {
        evaluate(&self.tree, &self.heldout)
    }
}

pub fn fit_worldtree(tracks: &TrackSet, config: &FitConfig) -> Result<FitOutput> {
    config.validate()?;
    let labeled = classify_static(tracks, config.static_epsilon);
    let (train, heldout) = labeled.split_heldout(config.heldout_stride);
    let dynamic = train.subset(|t| t.is_dynamic());
    let background = init_points(&train.subset(|t| !t.is_dynamic()));

    let scaffold = init_scaffold(&dynamic, config.n_bases, config.k)?;
    let points = init_points(&dynamic);
    let mut tree = build_worldtree(
        scaffold,
        points,
        &config.tree,
        |node| config.split.split(node, &dynamic),
        |tree, depth| optimize_layer(tree, depth, &dynamic, &config.weights, &config.optim),
    )?;
    tree.background = background;
    Ok(FitOutput {
        tree,
        train: dynamic,
        heldout,
    })
}
