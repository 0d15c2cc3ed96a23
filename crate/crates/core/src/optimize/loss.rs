use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Real, Vec3};
use crate::interval::{Frame, TimeInterval};
use crate::scaffold::{DeformationField, ScaffoldGraph, ScenePoint};
use crate::scene::TrackSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub track: f64,
    pub arap: f64,
    pub acc: f64,
    pub vel: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            track: 1.0,
            arap: 0.3,
            acc: 0.05,
            vel: 0.05,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_track", self.track), ("lambda_arap", self.arap), ("lambda_acc", self.acc), ("lambda_vel", self.vel)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} = {v} (need finite, >= 0)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossComponents<S = f64> {
    pub track: S,
    pub arap: S,
    pub acc: S,
    pub vel: S,
}

impl<S: Real> LossComponents<S> {
    pub fn zero() -> Self {
        Self {
            track: S::zero(),
            arap: S::zero(),
            acc: S::zero(),
            vel: S::zero(),
        }
    }

    pub fn weighted(&self, w: &LossWeights) -> S {
        self.track * w.track + self.arap * w.arap + self.acc * w.acc + self.vel * w.vel
    }

    pub fn value(&self) -> LossComponents<f64> {
        LossComponents {
            track: self.track.value(),
            arap: self.arap.value(),
            acc: self.acc.value(),
            vel: self.vel.value(),
        }
    }
}

/// One row of a node's loss curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub node: usize,
    pub total: f64,
    pub components: LossComponents,
}

pub const LOSS_CSV_HEADER: &str = "step,node,loss_total,loss_track,loss_arap,loss_acc,loss_vel";

impl LossRecord {
    pub fn csv_row(&self) -> String {
        let c = &self.components;
        format!("{},{},{},{},{},{},{}", self.step, self.node, self.total, c.track, c.arap, c.acc, c.vel)
    }
}

/// `λ_track·L_track + λ_arap·L_arap + λ_acc·L_acc + λ_vel·L_vel`.
pub fn total_loss(weights: &LossWeights, components: &LossComponents) -> Result<f64> {
    for (name, v) in [
        ("track", components.track),
        ("arap", components.arap),
        ("acc", components.acc),
        ("vel", components.vel),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFiniteComponent(name));
        }
    }
    Ok(components.weighted(weights))
}

/// Id-indexed view of the supervising tracks.
pub struct Supervision<'a> {
    tracks: &'a TrackSet,
    by_id: HashMap<u64, usize>,
}

impl<'a> Supervision<'a> {
    pub fn new(tracks: &'a TrackSet) -> Self {
        let by_id = tracks.tracks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        Self { tracks, by_id }
    }

    /// Visible observations of track `id` inside `window`.
    pub fn observations(&self, id: u64, window: TimeInterval) -> impl Iterator<Item = (Frame, Vec3)> + '_ {
        let track = self.by_id.get(&id).map(|&i| &self.tracks.tracks[i]);
        let lo = window.left.max(self.tracks.frames.left);
        let hi = window.right.min(self.tracks.frames.right);
        track
            .into_iter()
            .flat_map(move |t| (lo..=hi).filter_map(move |f| self.tracks.observation(t, f).map(|p| (f, p))))
    }
}

/// Sum of squared position errors over every (point, visible frame in
/// `window`) pair, and the pair count.
pub(crate) fn track_error_sum<S: Real>(
    graph: &ScaffoldGraph<S>,
    points: &[ScenePoint],
    supervision: &Supervision<'_>,
    window: TimeInterval,
) -> Result<(S, usize)> {
    let field = DeformationField::new(graph);
    let mut sum = S::zero();
    let mut count = 0;
    for p in points {
        let mut obs = supervision.observations(p.id, window).peekable();
        if obs.peek().is_none() {
            continue;
        }
        let pos = Vec3::lift(p.position);
        let anchor = field.anchor(pos, p.canonical_time)?;
        for (t, target) in obs {
            let w = field.transform(&anchor, t)?;
            sum = sum + (w.apply(pos) - Vec3::lift(target)).norm_squared();
            count += 1;
        }
    }
    Ok((sum, count))
}

/// Mean squared distance between each point deformed to every visible frame
/// of its source track inside `interval` and the observation there.
pub fn loss_track(scaffold: &ScaffoldGraph, points: &[ScenePoint], tracks: &TrackSet, interval: TimeInterval) -> Result<f64> {
    let (sum, count) = track_error_sum(scaffold, points, &Supervision::new(tracks), interval)?;
    if count == 0 {
        return Err(Error::NoVisibleObservations {
            left: interval.left,
            right: interval.right,
        });
    }
    Ok(sum / count as f64)
}

/// Consecutive frame pairs plus `len − 1` random long-range pairs, drawn from `seed`.
pub fn arap_frame_pairs(interval: TimeInterval, seed: u64) -> Vec<(Frame, Frame)> {
    let mut pairs: Vec<(Frame, Frame)> = (interval.left..interval.right).map(|t| (t, t + 1)).collect();
    if interval.len() > 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..interval.len() - 1 {
            let a = rng.random_range(interval.left..=interval.right);
            let mut b = rng.random_range(interval.left..interval.right);
            if b >= a {
                b += 1;
            }
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs
}

/// Distance term sum, local-coordinate term sum, and term count over
/// directed non-self edges × frame pairs.
pub(crate) fn arap_sums<S: Real>(graph: &ScaffoldGraph<S>, pairs: &[(Frame, Frame)]) -> (S, S, usize) {
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(a, list)| list.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        .collect();
    if edges.is_empty() || pairs.is_empty() {
        return (S::zero(), S::zero(), 0);
    }
    // edge length and neighbor offset in the basis' local frame, per used frame
    let mut slot: HashMap<Frame, usize> = HashMap::new();
    let mut lengths: Vec<Vec<S>> = Vec::new();
    let mut locals: Vec<Vec<Vec3<S>>> = Vec::new();
    for &(ts, td) in pairs {
        for t in [ts, td] {
            slot.entry(t).or_insert_with(|| {
                let inv: Vec<_> = graph
                    .bases()
                    .iter()
                    .map(|b| b.pose_unchecked(t).rotation().conjugate().rotation_matrix())
                    .collect();
                let (len, loc) = edges
                    .iter()
                    .map(|&(a, b)| {
                        let d = graph.bases()[b].pose_unchecked(t).translation()
                            - graph.bases()[a].pose_unchecked(t).translation();
                        (d.norm(), mat_vec(&inv[a], d))
                    })
                    .unzip();
                lengths.push(len);
                locals.push(loc);
                lengths.len() - 1
            });
        }
    }
    let mut dist = S::zero();
    let mut local = S::zero();
    for &(ts, td) in pairs {
        let (s, d) = (slot[&ts], slot[&td]);
        for e in 0..edges.len() {
            let stretch = lengths[d][e] - lengths[s][e];
            dist = dist + stretch * stretch;
            local = local + (locals[d][e] - locals[s][e]).norm_squared();
        }
    }
    (dist, local, edges.len() * pairs.len())
}

fn mat_vec<S: Real>(m: &[[S; 3]; 3], v: Vec3<S>) -> Vec3<S> {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

/// Mean over edges and frame pairs of the squared change in edge length plus
/// the squared change of each neighbor's coordinates in the basis' local frame.
pub fn loss_arap(scaffold: &ScaffoldGraph, frame_pairs: &[(Frame, Frame)]) -> Result<f64> {
    let frames = scaffold.frames();
    for &(a, b) in frame_pairs {
        frames.check(a)?;
        frames.check(b)?;
    }
    let (dist, local, count) = arap_sums(scaffold, frame_pairs);
    Ok(if count == 0 { 0.0 } else { (dist + local) / count as f64 })
}

fn relative_rotation<S: Real>(graph: &ScaffoldGraph<S>, basis: usize, t: Frame) -> Vec3<S> {
    let b = &graph.bases()[basis];
    (b.pose_unchecked(t + 1).rotation() * b.pose_unchecked(t).rotation().conjugate()).log()
}

/// Sum of first differences over `window`, and the term count.
pub(crate) fn vel_sum<S: Real>(graph: &ScaffoldGraph<S>, window: TimeInterval) -> (S, usize) {
    let mut sum = S::zero();
    let mut count = 0;
    for (i, b) in graph.bases().iter().enumerate() {
        for t in window.left..window.right {
            let dt = b.pose_unchecked(t + 1).translation() - b.pose_unchecked(t).translation();
            sum = sum + dt.norm_squared() + relative_rotation(graph, i, t).norm_squared();
            count += 1;
        }
    }
    (sum, count)
}

/// Sum of second differences over `window`, and the term count.
pub(crate) fn acc_sum<S: Real>(graph: &ScaffoldGraph<S>, window: TimeInterval) -> (S, usize) {
    let mut sum = S::zero();
    let mut count = 0;
    for (i, b) in graph.bases().iter().enumerate() {
        for t in window.left + 1..window.right {
            let tr = |f| b.pose_unchecked(f).translation();
            let da = tr(t + 1) - tr(t) * 2.0 + tr(t - 1);
            let dr = relative_rotation(graph, i, t) - relative_rotation(graph, i, t - 1);
            sum = sum + da.norm_squared() + dr.norm_squared();
            count += 1;
        }
    }
    (sum, count)
}

/// Mean squared per-frame change in translation and rotation angle.
pub fn loss_vel(scaffold: &ScaffoldGraph) -> Result<f64> {
    let frames = scaffold.frames();
    if frames.len() < 2 {
        return Err(Error::IntervalTooShort {
            left: frames.left,
            right: frames.right,
        });
    }
    let (sum, count) = vel_sum(scaffold, frames);
    Ok(sum / count as f64)
}

/// Mean squared second difference of translation and rotation vector.
pub fn loss_acc(scaffold: &ScaffoldGraph) -> Result<f64> {
    let frames = scaffold.frames();
    if frames.len() < 3 {
        return Err(Error::IntervalTooShort {
            left: frames.left,
            right: frames.right,
        });
    }
    let (sum, count) = acc_sum(scaffold, frames);
    Ok(sum / count as f64)
}
