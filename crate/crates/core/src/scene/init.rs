use super::tracks::TrackSet;
use crate::error::{Error, Result};
use crate::geometry::SE3Transform;
use crate::scaffold::{build_knn_graph, MotionBasis, ScaffoldGraph, ScenePoint, FALLBACK_RADIUS};

/// Labels each track: static iff its largest displacement from its first
/// visible position stays below `epsilon`.
pub fn classify_static(tracks: &TrackSet, epsilon: f64) -> TrackSet {
    let mut out = tracks.clone();
    for track in &mut out.tracks {
        let moving = match tracks.first_visible(track) {
            None => false,
            Some((_, origin)) => tracks
                .visible_observations(track)
                .any(|(_, p)| (p - origin).norm() >= epsilon),
        };
        track.dynamic = Some(moving);
    }
    out
}

/// Picks `n_bases` dynamic tracks by farthest-point sampling on first-frame
/// positions (seeded with the lowest id, ties by id) and turns each into a
/// translation-only motion basis.
pub fn init_scaffold(tracks: &TrackSet, n_bases: usize, k: usize) -> Result<ScaffoldGraph> {
    let mut candidates: Vec<_> = tracks
        .dynamic_tracks()
        .filter_map(|t| tracks.filled_positions(t).map(|p| (t.id, p)))
        .collect();
    if candidates.len() < n_bases || n_bases == 0 {
        return Err(Error::TooFewDynamicTracks {
            needed: n_bases.max(1),
            found: candidates.len(),
        });
    }
    candidates.sort_by_key(|(id, _)| *id);
    let first: Vec<_> = candidates.iter().map(|(_, p)| p[0]).collect();

    let mut chosen = vec![0usize];
    let mut min_d: Vec<f64> = first.iter().map(|p| (*p - first[0]).norm()).collect();
    while chosen.len() < n_bases {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for (i, &d) in min_d.iter().enumerate() {
            if !chosen.contains(&i) && d > best.0 {
                best = (d, i);
            }
        }
        chosen.push(best.1);
        for (i, d) in min_d.iter_mut().enumerate() {
            *d = d.min((first[i] - first[best.1]).norm());
        }
    }
    chosen.sort_unstable();

    let bases = chosen
        .iter()
        .map(|&i| {
            let poses = candidates[i].1.iter().map(|&p| SE3Transform::from_translation(p)).collect();
            MotionBasis::new(tracks.frames.left, poses, FALLBACK_RADIUS)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut graph = build_knn_graph(bases, k)?;
    graph.init_radii()?;
    Ok(graph)
}

/// Source track ids of the bases chosen by [`init_scaffold`], in basis order.
pub fn scaffold_source_ids(tracks: &TrackSet, graph: &ScaffoldGraph) -> Vec<u64> {
    graph
        .bases()
        .iter()
        .map(|b| {
            tracks
                .dynamic_tracks()
                .find(|t| {
                    tracks
                        .filled_positions(t)
                        .is_some_and(|p| p.iter().zip(b.poses()).all(|(a, q)| *a == q.translation()))
                })
                .map_or(u64::MAX, |t| t.id)
        })
        .collect()
}

/// One point per track with a visible observation, placed at its first one.
pub fn init_points(tracks: &TrackSet) -> Vec<ScenePoint> {
    tracks
        .tracks
        .iter()
        .filter_map(|t| {
            tracks.first_visible(t).map(|(frame, pos)| {
                let mut p = ScenePoint::new(t.id, pos, frame);
                p.color = palette(t.id);
                p
            })
        })
        .collect()
}

/// Golden-angle hue walk, fully saturated.
fn palette(id: u64) -> [f64; 3] {
    let h = (id as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - ((h % 2.0) - 1.0).abs();
    match h as u32 {
        0 => [1.0, x, 0.0],
        1 => [x, 1.0, 0.0],
        2 => [0.0, 1.0, x],
        3 => [0.0, x, 1.0],
        4 => [x, 0.0, 1.0],
        _ => [1.0, 0.0, x],
    }
}
