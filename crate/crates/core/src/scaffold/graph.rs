use serde::{Deserialize, Serialize};

use super::basis::{pairwise_max_distance, MotionBasis};
use crate::error::{Error, Result};
use crate::geometry::{Quaternion, Real, SE3Transform, Vec3};
use crate::interval::{Frame, TimeInterval};

/// Floats per pose in the flat parameter layout: translation (3) then quaternion (4).
pub const POSE_PARAMS: usize = 7;

/// Radius used when a basis has no neighbor at positive distance.
pub const FALLBACK_RADIUS: f64 = 1.0;

/// Motion bases plus, per basis, the indices of its `k` nearest bases under
/// the max-over-time distance. Every edge list starts with the basis itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldGraph<S = f64> {
    bases: Vec<MotionBasis<S>>,
    edges: Vec<Vec<usize>>,
}

impl<S: Real> ScaffoldGraph<S> {
    pub fn bases(&self) -> &[MotionBasis<S>] {
        &self.bases
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn k(&self) -> usize {
        self.edges.first().map_or(0, Vec::len)
    }

    pub fn frames(&self) -> TimeInterval {
        self.bases[0].frames()
    }

    /// Number of floats in [`ScaffoldGraph::to_params`].
    pub fn param_count(&self) -> usize {
        self.len() * self.frames().len() * POSE_PARAMS
    }

    pub fn value(&self) -> ScaffoldGraph<f64> {
        ScaffoldGraph {
            bases: self.bases.iter().map(MotionBasis::value).collect(),
            edges: self.edges.clone(),
        }
    }
}

impl ScaffoldGraph<f64> {
    /// Flattens poses basis-major, then frame, then `(tx, ty, tz, qw, qx, qy, qz)`.
    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for basis in &self.bases {
            for pose in basis.poses() {
                let t = pose.translation();
                let q = pose.rotation();
                out.extend_from_slice(&[t.x, t.y, t.z, q.w, q.x, q.y, q.z]);
            }
        }
        out
    }

    /// Same graph with poses read from `params` (quaternions are normalized).
    pub fn with_params<T: Real>(&self, params: &[T]) -> ScaffoldGraph<T> {
        assert_eq!(params.len(), self.param_count(), "parameter length mismatch");
        let frames = self.frames();
        let per_basis = frames.len() * POSE_PARAMS;
        let bases = self
            .bases
            .iter()
            .zip(params.chunks_exact(per_basis))
            .map(|(basis, chunk)| {
                let poses = chunk
                    .chunks_exact(POSE_PARAMS)
                    .map(|p| {
                        SE3Transform::new(Quaternion::new(p[3], p[4], p[5], p[6]), Vec3::new(p[0], p[1], p[2]))
                    })
                    .collect();
                MotionBasis::new(frames.left, poses, basis.radius()).expect("radius already validated")
            })
            .collect();
        ScaffoldGraph {
            bases,
            edges: self.edges.clone(),
        }
    }

    /// Overwrites poses from `params`, renormalizing quaternions.
    pub fn set_params(&mut self, params: &[f64]) {
        *self = self.with_params(params);
    }

    /// Index of the `(basis, frame)` pose block inside the flat parameters.
    pub fn param_offset(&self, basis: usize, t: Frame) -> usize {
        let frames = self.frames();
        (basis * frames.len() + (t - frames.left) as usize) * POSE_PARAMS
    }

    /// Sets each radius to the median squared max-distance to its non-self neighbors.
    pub fn init_radii(&mut self) -> Result<()> {
        for i in 0..self.bases.len() {
            let mut d2 = Vec::new();
            for &j in &self.edges[i] {
                if j != i {
                    let d = pairwise_max_distance(&self.bases[i], &self.bases[j])?;
                    d2.push(d * d);
                }
            }
            let r = median(&mut d2).filter(|r| *r > 0.0).unwrap_or(FALLBACK_RADIUS);
            self.bases[i].set_radius(r);
        }
        Ok(())
    }

    /// Copy restricted to `window`, with the KNN graph rebuilt on the restricted trajectories.
    pub fn restrict(&self, window: TimeInterval) -> Result<Self> {
        let bases = self
            .bases
            .iter()
            .map(|b| b.restrict(window))
            .collect::<Result<Vec<_>>>()?;
        build_knn_graph(bases, self.k())
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Builds the KNN scaffold graph. Each basis lists itself first, then the
/// `k − 1` other bases with the smallest max-over-time distance (ties by index).
pub fn build_knn_graph<S: Real>(bases: Vec<MotionBasis<S>>, k: usize) -> Result<ScaffoldGraph<S>> {
    let n = bases.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let frames = bases[0].frames();
    if bases.iter().any(|b| b.frames() != frames) {
        return Err(Error::DisjointFrameRanges);
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pairwise_max_distance(&bases[i], &bases[j])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let edges = (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist[i * n + a].total_cmp(&dist[i * n + b]).then(a.cmp(&b)));
            std::iter::once(i).chain(others.into_iter().take(k - 1)).collect()
        })
        .collect();
    Ok(ScaffoldGraph { bases, edges })
}

/// Index of the basis whose translation at `t` is closest to `pos` (ties by index).
pub fn nearest_basis<S: Real>(pos: Vec3<S>, graph: &ScaffoldGraph<S>, t: Frame) -> Result<usize> {
    graph.frames().check(t)?;
    let p = pos.value();
    let mut best = (f64::INFINITY, 0);
    for (i, basis) in graph.bases().iter().enumerate() {
        let d = (basis.pose_unchecked(t).translation().value() - p).norm_squared();
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaffold::basis::tests::track_basis;

    fn static_bases(xs: &[f64], frames: usize) -> Vec<MotionBasis> {
        xs.iter().map(|&x| track_basis(1, &vec![[x, 0.0, 0.0]; frames])).collect()
    }

    #[test]
    fn knn_on_a_line() {
        let g = build_knn_graph(static_bases(&[0.0, 1.0, 3.0], 2), 2).unwrap();
        assert_eq!(g.edges()[0], vec![0, 1]);
        assert_eq!(g.edges()[1], vec![1, 0]);
        assert_eq!(g.edges()[2], vec![2, 1]);
    }

    #[test]
    fn full_k_lists_everything() {
        let g = build_knn_graph(static_bases(&[0.0, 5.0, 3.0, -1.0], 3), 4).unwrap();
        for (i, e) in g.edges().iter().enumerate() {
            let mut s = e.clone();
            s.sort();
            assert_eq!(s, vec![0, 1, 2, 3]);
            assert_eq!(e[0], i);
        }
    }

    #[test]
    fn single_basis_self_edge() {
        let g = build_knn_graph(static_bases(&[2.0], 3), 1).unwrap();
        assert_eq!(g.edges(), &[vec![0]]);
    }

    #[test]
    fn self_edge_survives_duplicate_bases() {
        let g = build_knn_graph(static_bases(&[1.0, 1.0, 1.0], 2), 1).unwrap();
        assert_eq!(g.edges(), &[vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn k_too_large() {
        assert_eq!(
            build_knn_graph(static_bases(&[0.0, 1.0], 2), 3).unwrap_err(),
            Error::KTooLarge { k: 3, n: 2 }
        );
    }

    #[test]
    fn nearest_basis_ties_prefer_smaller_index() {
        let g = build_knn_graph(static_bases(&[0.0, -1.0, 5.0, 7.0, 1.0], 2), 2).unwrap();
        assert_eq!(nearest_basis(Vec3::new(7.0, 0.0, 0.0), &g, 1).unwrap(), 3);
        assert_eq!(nearest_basis(Vec3::new(0.0, 0.0, 0.0), &g, 2).unwrap(), 0);
        // equidistant from bases 1 (x=-1) and 4 (x=1)
        let h = build_knn_graph(static_bases(&[10.0, -1.0, 5.0, 7.0, 1.0], 2), 2).unwrap();
        assert_eq!(nearest_basis(Vec3::new(0.0, 0.0, 0.0), &h, 1).unwrap(), 1);
        assert!(matches!(nearest_basis(Vec3::zero(), &g, 3), Err(Error::FrameOutOfRange { .. })));
    }

    #[test]
    fn radii_use_median_squared_neighbor_distance() {
        let mut g = build_knn_graph(static_bases(&[0.0, 1.0, 3.0, 6.0], 2), 3).unwrap();
        g.init_radii().unwrap();
        // basis 0 neighbors: 1 (d=1), 2 (d=3) -> median of {1, 9} = 5
        assert_eq!(g.bases()[0].radius(), 5.0);
        let mut single = build_knn_graph(static_bases(&[0.0], 2), 1).unwrap();
        single.init_radii().unwrap();
        assert_eq!(single.bases()[0].radius(), FALLBACK_RADIUS);
    }

    #[test]
    fn params_round_trip() {
        let g = build_knn_graph(static_bases(&[0.0, 1.0, 3.0], 4), 2).unwrap();
        let p = g.to_params();
        assert_eq!(p.len(), g.param_count());
        assert_eq!(g.with_params(&p), g);
        assert_eq!(p[g.param_offset(2, 3)], 3.0);
    }
}
