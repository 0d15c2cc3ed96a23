use std::cell::RefCell;
use std::collections::HashMap;

use super::graph::{nearest_basis, ScaffoldGraph};
use super::point::{DeformedPoint, ScenePoint};
use crate::error::{Error, Result};
use crate::geometry::{blend_dual_quaternions, DualQuaternion, Real, SE3Transform, Vec3};
use crate::interval::Frame;

/// Gaussian skinning weight `exp(−‖q − b‖² / (2·radius))`.
pub fn skin_weight(query_pos: Vec3, basis_pos: Vec3, radius: f64) -> Result<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::NonPositiveRadius(radius));
    }
    Ok(skin_weight_unchecked(query_pos, basis_pos, radius))
}

fn skin_weight_unchecked<S: Real>(query_pos: Vec3<S>, basis_pos: Vec3<S>, radius: f64) -> S {
    (-(query_pos - basis_pos).norm_squared() / (2.0 * radius)).exp()
}

/// Blend neighborhood of a query: the nearest basis' edge list and the
/// skinning weight of each neighbor, all evaluated at the source frame.
#[derive(Debug, Clone)]
pub struct Anchor<S> {
    pub t_source: Frame,
    pub neighbors: Vec<usize>,
    pub weights: Vec<S>,
}

/// Deformation field over a scaffold with memoized per-basis relative motions.
///
/// Many queries share a source frame, so `ΔM = M_td · M_ts⁻¹` is computed
/// once per `(basis, t_s, t_d)`.
pub struct DeformationField<'g, S: Real> {
    graph: &'g ScaffoldGraph<S>,
    deltas: RefCell<HashMap<(usize, Frame, Frame), DualQuaternion<S>>>,
}

impl<'g, S: Real> DeformationField<'g, S> {
    pub fn new(graph: &'g ScaffoldGraph<S>) -> Self {
        Self {
            graph,
            deltas: RefCell::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &ScaffoldGraph<S> {
        self.graph
    }

    pub fn anchor(&self, pos: Vec3<S>, t_source: Frame) -> Result<Anchor<S>> {
        let nearest = nearest_basis(pos, self.graph, t_source)?;
        let neighbors = self.graph.edges()[nearest].clone();
        let weights = neighbors
            .iter()
            .map(|&n| {
                let basis = &self.graph.bases()[n];
                skin_weight_unchecked(pos, basis.pose_unchecked(t_source).translation(), basis.radius())
            })
            .collect();
        Ok(Anchor {
            t_source,
            neighbors,
            weights,
        })
    }

    fn delta(&self, basis: usize, t_s: Frame, t_d: Frame) -> DualQuaternion<S> {
        if let Some(dq) = self.deltas.borrow().get(&(basis, t_s, t_d)) {
            return *dq;
        }
        let b = &self.graph.bases()[basis];
        let dq = b
            .pose_unchecked(t_d)
            .compose(&b.pose_unchecked(t_s).inverse())
            .to_dual_quaternion();
        self.deltas.borrow_mut().insert((basis, t_s, t_d), dq);
        dq
    }

    /// Blended transform carrying the anchor's neighborhood from `t_s` to `t_target`.
    pub fn transform(&self, anchor: &Anchor<S>, t_target: Frame) -> Result<SE3Transform<S>> {
        self.graph.frames().check(t_target)?;
        let dqs: Vec<_> = anchor
            .neighbors
            .iter()
            .map(|&n| self.delta(n, anchor.t_source, t_target))
            .collect();
        blend_dual_quaternions(&dqs, &anchor.weights)
    }

    pub fn query(&self, pos: Vec3<S>, t_s: Frame, t_d: Frame) -> Result<SE3Transform<S>> {
        self.graph.frames().check(t_d)?;
        let anchor = self.anchor(pos, t_s)?;
        self.transform(&anchor, t_d)
    }
}

/// Deformation field `W(pos, G, t_s, t_d)`: the dual-quaternion blend of the
/// nearest basis' neighbors' relative motions, weighted by skinning weight.
pub fn deform_query<S: Real>(pos: Vec3<S>, graph: &ScaffoldGraph<S>, t_s: Frame, t_d: Frame) -> Result<SE3Transform<S>> {
    DeformationField::new(graph).query(pos, t_s, t_d)
}

/// Carries a scene point from its canonical frame to `target`.
pub fn deform_point(p: &ScenePoint, graph: &ScaffoldGraph, target: Frame) -> Result<DeformedPoint> {
    let w = deform_query(p.position, graph, p.canonical_time, target)?;
    Ok(apply_to_point(p, &w, target, 0))
}

pub(crate) fn apply_to_point(p: &ScenePoint, w: &SE3Transform, target: Frame, source_node: usize) -> DeformedPoint {
    DeformedPoint {
        id: p.id,
        position: w.apply(p.position),
        rotation: (w.rotation() * p.rotation).normalize(),
        scale: p.scale,
        opacity: p.opacity,
        color: p.color,
        time: target,
        source_node,
    }
}
