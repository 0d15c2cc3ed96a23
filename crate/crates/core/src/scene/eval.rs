use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::tracks::TrackSet;
use crate::error::Result;
use crate::geometry::Vec3;
use crate::interval::Frame;
use crate::scaffold::{DeformationField, ScenePoint};
use crate::tree::{TreeNode, WorldTree};

/// Track-space accuracy of a fitted tree against held-out trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_track_rmse: BTreeMap<u64, f64>,
    /// Mean of the per-track RMSEs.
    pub mean_rmse: f64,
    /// Mean error at each track's last visible frame.
    pub endpoint_error: f64,
    /// RMSE over all observations whose frame falls in each leaf.
    pub per_interval_rmse: BTreeMap<usize, f64>,
    pub per_interval_count: BTreeMap<usize, usize>,
    /// RMSE over all observations pooled.
    pub pooled_rmse: f64,
}

pub const REPORT_HEADER: &str = "kind,key,value";

impl EvalReport {
    pub fn summary_line(&self) -> String {
        format!("mean_rmse={} endpoint={}", self.mean_rmse, self.endpoint_error)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for (id, v) in &self.per_track_rmse {
            let _ = writeln!(out, "track,{id},{v}");
        }
        for (j, v) in &self.per_interval_rmse {
            let _ = writeln!(out, "leaf,{j},{v}");
        }
        let _ = writeln!(out, "summary,mean_rmse,{}", self.mean_rmse);
        let _ = writeln!(out, "summary,endpoint,{}", self.endpoint_error);
        let _ = writeln!(out, "summary,pooled_rmse,{}", self.pooled_rmse);
        out
    }
}

struct LeafLevels<'t> {
    fields: Vec<(DeformationField<'t, f64>, &'t [ScenePoint], crate::interval::TimeInterval)>,
    by_id: Vec<HashMap<u64, usize>>,
}

impl<'t> LeafLevels<'t> {
    fn new(leaf: &'t TreeNode) -> Self {
        let mut fields = Vec::new();
        let mut by_id = Vec::new();
        for level in leaf.levels() {
            by_id.push(level.points.iter().enumerate().map(|(i, p)| (p.id, i)).collect());
            fields.push((DeformationField::new(level.scaffold), level.points, level.interval));
        }
        Self { fields, by_id }
    }

    /// Mean prediction of every level holding a point spawned from `id`;
    /// otherwise of every level able to carry a probe from `probe`'s frame.
    fn predict(&self, id: u64, probe: (Frame, Vec3), t: Frame) -> Result<Option<Vec3>> {
        let mut sum = Vec3::zero();
        let mut n = 0usize;
        for ((field, points, _), index) in self.fields.iter().zip(&self.by_id) {
            if let Some(&i) = index.get(&id) {
                let p = &points[i];
                sum = sum + field.query(p.position, p.canonical_time, t)?.apply(p.position);
                n += 1;
            }
        }
        if n == 0 {
            for (field, _, interval) in &self.fields {
                if interval.contains(probe.0) {
                    sum = sum + field.query(probe.1, probe.0, t)?.apply(probe.1);
                    n += 1;
                }
            }
        }
        Ok((n > 0).then(|| sum * (1.0 / n as f64)))
    }
}

/// Predicts each held-out observation with the leaf whose interval contains
/// its frame and reports per-track, per-leaf, and pooled errors.
pub fn evaluate(tree: &WorldTree, heldout: &TrackSet) -> Result<EvalReport> {
    let background: HashMap<u64, Vec3> = tree.background.iter().map(|p| (p.id, p.position)).collect();
    let mut leaves: HashMap<usize, LeafLevels<'_>> = HashMap::new();
    let mut per_track_rmse = BTreeMap::new();
    let mut endpoint_sum = 0.0;
    let mut leaf_sq: BTreeMap<usize, (f64, usize)> = BTreeMap::new();

    for track in &heldout.tracks {
        let Some(probe) = heldout.first_visible(track) else {
            continue;
        };
        let mut sq = 0.0;
        let mut n = 0usize;
        let mut last = 0.0;
        for (t, obs) in heldout.visible_observations(track) {
            let leaf = tree.leaf_for(t)?;
            let levels = leaves.entry(leaf.index).or_insert_with(|| LeafLevels::new(leaf));
            let pred = match background.get(&track.id) {
                Some(&p) => p,
                None => levels.predict(track.id, probe, t)?.unwrap_or(probe.1),
            };
            let e2 = (pred - obs).norm_squared();
            sq += e2;
            n += 1;
            last = e2.sqrt();
            let slot = leaf_sq.entry(leaf.index).or_default();
            slot.0 += e2;
            slot.1 += 1;
        }
        per_track_rmse.insert(track.id, (sq / n as f64).sqrt());
        endpoint_sum += last;
    }

    let tracks = per_track_rmse.len().max(1) as f64;
    let (total_sq, total_n) = leaf_sq.values().fold((0.0, 0usize), |(s, n), (a, b)| (s + a, n + b));
    Ok(EvalReport {
        mean_rmse: per_track_rmse.values().sum::<f64>() / tracks,
        endpoint_error: endpoint_sum / tracks,
        per_interval_rmse: leaf_sq.iter().map(|(&j, &(s, n))| (j, (s / n as f64).sqrt())).collect(),
        per_interval_count: leaf_sq.iter().map(|(&j, &(_, n))| (j, n)).collect(),
        pooled_rmse: if total_n == 0 { 0.0 } else { (total_sq / total_n as f64).sqrt() },
        per_track_rmse,
    })
}
