use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::interval::{Frame, TimeInterval};
use crate::scaffold::{ScaffoldGraph, ScenePoint};

/// Midpoint split `⌊(L + R) / 2⌋`, raised to `L + 1` so the left child is never empty.
pub fn partition_point_binary(interval: TimeInterval) -> Result<Frame> {
    if interval.len() < 2 {
        return Err(Error::IntervalTooShort {
            left: interval.left,
            right: interval.right,
        });
    }
    let mid = ((interval.left as u64 + interval.right as u64) / 2) as Frame;
    Ok(mid.max(interval.left + 1))
}

/// Children intervals `[L, T_P − 1]` and `[T_P, R]`.
pub fn child_intervals(interval: TimeInterval, split: Frame) -> Result<(TimeInterval, TimeInterval)> {
    if !(interval.left < split && split <= interval.right) {
        return Err(Error::PartitionOutOfRange {
            point: split,
            left: interval.left,
            right: interval.right,
        });
    }
    Ok((
        TimeInterval::new(interval.left, split - 1)?,
        TimeInterval::new(split, interval.right)?,
    ))
}

/// Splits every basis' poses at `split` (`t < split` left, `t >= split` right)
/// and rebuilds each child's KNN graph on the restricted trajectories.
pub fn partition_bases(scaffold: &ScaffoldGraph, split: Frame) -> Result<(ScaffoldGraph, ScaffoldGraph)> {
    let (left, right) = child_intervals(scaffold.frames(), split)?;
    Ok((scaffold.restrict(left)?, scaffold.restrict(right)?))
}

/// Splits points by canonical time; ids and order are preserved.
pub fn partition_points(points: &[ScenePoint], split: Frame) -> (Vec<ScenePoint>, Vec<ScenePoint>) {
    points.iter().cloned().partition(|p| p.canonical_time < split)
}

/// Caps the inherited points at `cap` by stratified sampling over canonical
/// time and resets every opacity to `opacity_reset`.
pub fn inherit_points(points: Vec<ScenePoint>, cap: usize, opacity_reset: f64) -> Vec<ScenePoint> {
    let mut kept = stratified_cap(points, cap);
    for p in &mut kept {
        p.opacity = opacity_reset;
    }
    kept
}

/// Keeps at most `cap` points, sorted by id.
///
/// Each frame first receives an equal quota of its lowest-id points; leftover
/// slots go one at a time to the non-exhausted frame with the fewest selected
/// points (then most unselected, then earlier frame), again taking the lowest
/// remaining id.
pub fn stratified_cap(points: Vec<ScenePoint>, cap: usize) -> Vec<ScenePoint> {
    let mut kept = if points.len() <= cap {
        points
    } else {
        let mut by_frame: BTreeMap<Frame, Vec<ScenePoint>> = BTreeMap::new();
        for p in points {
            by_frame.entry(p.canonical_time).or_default().push(p);
        }
        let mut queues: Vec<Vec<ScenePoint>> = by_frame
            .into_values()
            .map(|mut v| {
                // reversed so that pop() yields the lowest id
                v.sort_by_key(|p| std::cmp::Reverse(p.id));
                v
            })
            .collect();
        let quota = cap / queues.len();
        let mut kept = Vec::with_capacity(cap);
        let mut taken = vec![0usize; queues.len()];
        for (q, n) in queues.iter_mut().zip(&mut taken) {
            *n = quota.min(q.len());
            for _ in 0..*n {
                kept.push(q.pop().expect("bounded by len"));
            }
        }
        while kept.len() < cap {
            let best = (0..queues.len())
                .filter(|&i| !queues[i].is_empty())
                .min_by(|&i, &j| taken[i].cmp(&taken[j]).then(queues[j].len().cmp(&queues[i].len())).then(i.cmp(&j)))
                .expect("points remain while below cap");
            kept.push(queues[best].pop().expect("non-empty"));
            taken[best] += 1;
        }
        kept
    };
    kept.sort_by_key(|p| p.id);
    kept
}
