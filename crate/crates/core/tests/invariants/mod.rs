//! Randomized checks of the structural invariants of trees, partitions,
//! inheritance, chains, deformation and persistence, shared by the property
//! tests and the acceptance suite.

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use worldtree::geometry::{Quaternion, SE3Transform, Vec3};
use worldtree::scaffold::{build_knn_graph, deform_point, deform_query, MotionBasis, ScaffoldGraph, ScenePoint};
use worldtree::scene::io::{parse_tracks_csv, write_tracks_csv};
use worldtree::scene::{Track, TrackSet};
use worldtree::tree::{
    ancestral_chain_indices, assemble_node, build_worldtree, child_intervals, depth_of, inherit_points,
    partition_bases, partition_point_binary, partition_points, TreeConfig, WorldTree,
};
use worldtree::TimeInterval;

pub type Outcome = Result<(), String>;

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn pose() -> impl Strategy<Value = SE3Transform> {
    (
        prop::array::uniform3(-1.0..1.0f64),
        -3.0..3.0f64,
        prop::array::uniform3(-2.0..2.0f64),
    )
        .prop_map(|(axis, angle, t)| {
            let axis = Vec3::from(axis);
            let rot = if axis.norm() < 1e-3 {
                Quaternion::identity()
            } else {
                Quaternion::from_axis_angle(axis.scale(1.0 / axis.norm()), angle)
            };
            SE3Transform::new(rot, Vec3::from(t))
        })
}

/// Scaffold of 1..=5 bases over `[start, start + len - 1]`.
fn scaffold(start: u32, len: usize) -> impl Strategy<Value = ScaffoldGraph> {
    (1usize..=5)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec((prop::collection::vec(pose(), len), 0.1..2.0f64), n),
                1..=n,
            )
        })
        .prop_map(move |(bases, k)| {
            let bases = bases
                .into_iter()
                .map(|(poses, radius)| MotionBasis::new(start, poses, radius).unwrap())
                .collect();
            build_knn_graph(bases, k).unwrap()
        })
}

fn points(interval: TimeInterval, max: usize) -> impl Strategy<Value = Vec<ScenePoint>> {
    prop::collection::vec((prop::array::uniform3(-2.0..2.0f64), interval.left..=interval.right), 0..max).prop_map(
        |raw| {
            raw.into_iter()
                .enumerate()
                .map(|(i, (p, t))| ScenePoint::new(i as u64, Vec3::from(p), t))
                .collect()
        },
    )
}

/// Unoptimized depth-2 tree over 4..=24 frames.
fn tree() -> impl Strategy<Value = WorldTree> {
    (4usize..=24)
        .prop_flat_map(|len| {
            let interval = TimeInterval::new(1, len as u32).unwrap();
            (scaffold(1, len), points(interval, 60), 1usize..40)
        })
        .prop_map(|(graph, pts, cap)| {
            let config = TreeConfig {
                max_depth: 2,
                caps: vec![None, Some(cap)],
                opacity_reset: 0.5,
            };
            build_worldtree(graph, pts, &config, |n| partition_point_binary(n.interval), |_, _| Ok(())).unwrap()
        })
}

fn track_set() -> impl Strategy<Value = TrackSet> {
    (1u32..5, 1usize..8, 1usize..6)
        .prop_flat_map(|(start, len, n)| {
            let track = (
                prop::collection::vec(prop::array::uniform3(-1e3..1e3f64), len),
                prop::collection::vec(any::<bool>(), len),
            );
            (Just(start), Just(len), prop::collection::btree_set(0u64..1000, n), prop::collection::vec(track, n))
        })
        .prop_map(|(start, len, ids, raw)| {
            let frames = TimeInterval::new(start, start + len as u32 - 1).unwrap();
            let tracks = ids
                .into_iter()
                .zip(raw)
                .map(|(id, (pos, mut vis))| {
                    // the frame range is derived from the rows, so keep both ends observed
                    vis[0] = true;
                    let positions = pos.into_iter().map(Vec3::from).collect();
                    Track::new(id, positions, vis)
                })
                .collect();
            TrackSet::new(frames, tracks)
        })
}

pub fn partition_conserves_frames(cases: u32) -> Outcome {
    check(cases, (1u32..500, 2u32..600), |(left, len)| {
        let interval = TimeInterval::new(left, left + len - 1).unwrap();
        let split = partition_point_binary(interval).unwrap();
        let (a, b) = child_intervals(interval, split).unwrap();
        prop_assert_eq!(a.left, interval.left);
        prop_assert_eq!(a.right + 1, b.left);
        prop_assert_eq!(b.right, interval.right);
        prop_assert!(!a.is_empty() && !b.is_empty());
        prop_assert_eq!(a.len() + b.len(), interval.len());
        Ok(())
    })
}

pub fn partition_conserves_poses_and_points(cases: u32) -> Outcome {
    check(cases, (3usize..12).prop_flat_map(|len| {
            let interval = TimeInterval::new(2, 1 + len as u32).unwrap();
            (scaffold(2, len), points(interval, 40), 3..=(1 + len as u32))
        }), |(graph, pts, split)| {
        let (l, r) = partition_bases(&graph, split).unwrap();
        for ((p, a), b) in graph.bases().iter().zip(l.bases()).zip(r.bases()) {
            prop_assert_eq!(a.poses().len() + b.poses().len(), p.poses().len());
            let joined: Vec<_> = a.poses().iter().chain(b.poses()).cloned().collect();
            prop_assert_eq!(joined.as_slice(), p.poses());
        }
        let (pl, pr) = partition_points(&pts, split);
        prop_assert!(pl.iter().all(|p| p.canonical_time < split));
        prop_assert!(pr.iter().all(|p| p.canonical_time >= split));
        let mut joined: Vec<_> = pl.into_iter().chain(pr).collect();
        joined.sort_by_key(|p| p.id);
        prop_assert_eq!(joined, pts);
        Ok(())
    })
}

pub fn chain_indices_follow_heap_layout(cases: u32) -> Outcome {
    check(cases, 1usize..(1 << 20), |j| {
        let chain = ancestral_chain_indices(j);
        prop_assert_eq!(chain.len() as u32, depth_of(j));
        prop_assert_eq!(chain.len() as u32, j.ilog2());
        for (alpha, k) in chain.iter().enumerate() {
            prop_assert_eq!(*k, j >> (alpha + 1));
        }
        Ok(())
    })
}

pub fn inheritance_caps_and_resets(cases: u32) -> Outcome {
    check(cases, (points(TimeInterval::new(1, 30).unwrap(), 300), 1usize..200, 0.01..1.0f64), |(pts, cap, reset)| {
        let out = inherit_points(pts.clone(), cap, reset);
        prop_assert_eq!(out.len(), pts.len().min(cap));
        prop_assert!(out.iter().all(|p| p.opacity == reset));
        let by_id: BTreeMap<u64, &ScenePoint> = pts.iter().map(|p| (p.id, p)).collect();
        for p in &out {
            let src = by_id[&p.id];
            prop_assert_eq!(p.position, src.position);
            prop_assert_eq!(p.canonical_time, src.canonical_time);
        }
        // stratified: a frame only falls more than one point behind another
        // once all of its points are kept
        let mut avail: BTreeMap<u32, usize> = BTreeMap::new();
        for p in &pts {
            *avail.entry(p.canonical_time).or_default() += 1;
        }
        let mut kept: BTreeMap<u32, usize> = avail.keys().map(|&t| (t, 0)).collect();
        for p in &out {
            *kept.get_mut(&p.canonical_time).unwrap() += 1;
        }
        let most = kept.values().copied().max().unwrap_or(0);
        for (t, &n) in &kept {
            prop_assert!(n + 1 >= most || n == avail[t], "frame {} kept {} of {}, max {}", t, n, avail[t], most);
        }
        Ok(())
    })
}

pub fn tree_structure_and_chain_copies(cases: u32) -> Outcome {
    check(cases, tree(), |tree| {
        for node in tree.nodes.values() {
            prop_assert_eq!(node.depth, depth_of(node.index));
            prop_assert_eq!(node.chain.len() as u32, node.depth);
            prop_assert_eq!(node.scaffold.frames(), node.interval);
            prop_assert!(node.points.iter().all(|p| node.interval.contains(p.canonical_time)));
            let sources: Vec<_> = node.chain.iter().map(|c| c.source_index).collect();
            prop_assert_eq!(sources, ancestral_chain_indices(node.index));
            if let (Some(l), Some(r)) = (tree.nodes.get(&(2 * node.index)), tree.nodes.get(&(2 * node.index + 1))) {
                prop_assert_eq!(l.interval.left, node.interval.left);
                prop_assert_eq!(l.interval.right + 1, r.interval.left);
                prop_assert_eq!(r.interval.right, node.interval.right);
            }
        }
        Ok(())
    })
}

pub fn chain_copies_do_not_alias(cases: u32) -> Outcome {
    check(cases, (tree(), 0.1..5.0f64), |(tree, shift)| {
        prop_assume!(tree.nodes.contains_key(&4) && tree.nodes.contains_key(&5));
        let before5 = tree.nodes[&5].chain.clone();
        let before1 = tree.nodes[&1].clone();
        let mut tree = tree;
        let copy = tree.nodes.get_mut(&4).unwrap().chain.last_mut().unwrap();
        prop_assert_eq!(copy.source_index, 1);
        let mut params = copy.scaffold.to_params();
        params.iter_mut().step_by(7).for_each(|x| *x += shift);
        copy.scaffold.set_params(&params);
        copy.points.clear();
        prop_assert_eq!(&tree.nodes[&5].chain, &before5);
        prop_assert_eq!(&tree.nodes[&1], &before1);
        Ok(())
    })
}

pub fn assembled_count_is_sum_of_levels(cases: u32) -> Outcome {
    check(cases, (tree(), 0usize..7, 0.0..1.0f64), |(tree, pick, frac)| {
        let node = tree.nodes.values().nth(pick % tree.len()).unwrap();
        let t = node.interval.left + (frac * (node.interval.len() - 1) as f64).round() as u32;
        let expected = node.points.len() + node.chain.iter().map(|c| c.points.len()).sum::<usize>();
        let out = assemble_node(node, t).unwrap();
        prop_assert_eq!(out.len(), expected);
        prop_assert!(out.iter().all(|p| p.time == t && p.position.is_finite()));
        Ok(())
    })
}

pub fn deformation_at_canonical_time_is_identity(cases: u32) -> Outcome {
    check(cases, (2usize..8).prop_flat_map(|len| {
            let interval = TimeInterval::new(1, len as u32).unwrap();
            (scaffold(1, len), points(interval, 20))
        }), |(graph, pts)| {
        for p in &pts {
            let d = deform_point(p, &graph, p.canonical_time).unwrap();
            prop_assert!(d.position.distance(p.position) < 1e-9);
            prop_assert!(d.rotation.angle_to(p.rotation) < 1e-6);
            let m = deform_query(p.position, &graph, p.canonical_time, p.canonical_time).unwrap();
            prop_assert!(m.max_abs_diff(&SE3Transform::identity()) < 1e-9);
        }
        Ok(())
    })
}

pub fn tracks_round_trip_through_csv(cases: u32) -> Outcome {
    check(cases, track_set(), |tracks| {
        let back = parse_tracks_csv(&write_tracks_csv(&tracks)).unwrap();
        prop_assert_eq!(back, tracks);
        Ok(())
    })
}

pub fn tree_round_trips_through_json(cases: u32) -> Outcome {
    check(cases, tree(), |tree| {
        let text = serde_json::to_string(&tree).unwrap();
        let back: WorldTree = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, tree);
        Ok(())
    })
}

/// Every invariant, by name.
#[allow(dead_code)]
pub fn all(cases: u32) -> Vec<(&'static str, Outcome)> {
    vec![
        ("partition_conserves_frames", partition_conserves_frames(cases)),
        ("partition_conserves_poses_and_points", partition_conserves_poses_and_points(cases)),
        ("chain_indices_follow_heap_layout", chain_indices_follow_heap_layout(cases)),
        ("inheritance_caps_and_resets", inheritance_caps_and_resets(cases)),
        ("tree_structure_and_chain_copies", tree_structure_and_chain_copies(cases)),
        ("chain_copies_do_not_alias", chain_copies_do_not_alias(cases)),
        ("assembled_count_is_sum_of_levels", assembled_count_is_sum_of_levels(cases)),
        ("deformation_at_canonical_time_is_identity", deformation_at_canonical_time_is_identity(cases)),
        ("tracks_round_trip_through_csv", tracks_round_trip_through_csv(cases)),
        ("tree_round_trips_through_json", tree_round_trips_through_json(cases)),
    ]
}
