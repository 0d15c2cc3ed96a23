//! Worked examples for node optimization, layer scheduling, assembly,
//! evaluation and the command-line front end.

use std::fs;
use std::process::Command as Process;

use clap::Parser;
use worldtree::cli::{self, Cli, TREE_FILE};
use worldtree::geometry::{SE3Transform, Vec3};
use worldtree::optimize::{optimize_layer, optimize_node, LossWeights, OptimConfig};
use worldtree::scaffold::{build_knn_graph, MotionBasis, ScaffoldGraph, ScenePoint};
use worldtree::scene::{evaluate, init_points, Track, TrackSet};
use worldtree::tree::{
    assemble_node, build_worldtree, partition_point_binary, AncestorCopy, TreeConfig, TreeNode, WorldTree,
};
use worldtree::TimeInterval;

const FRAMES: u32 = 10;

fn interval() -> TimeInterval {
    TimeInterval::new(1, FRAMES).unwrap()
}

/// One track moving along x with the given per-frame step.
fn moving_track(id: u64, start: Vec3, step: f64) -> Track {
    let positions = (0..FRAMES).map(|i| start + Vec3::new(step * i as f64, 0.0, 0.0)).collect();
    Track::new(id, positions, vec![true; FRAMES as usize])
}

fn single_basis(step: f64) -> ScaffoldGraph {
    let poses = (0..FRAMES)
        .map(|i| SE3Transform::from_translation(Vec3::new(step * i as f64, 0.0, 0.0)))
        .collect();
    build_knn_graph(vec![MotionBasis::new(1, poses, 1.0).unwrap()], 1).unwrap()
}

fn small_lr() -> OptimConfig {
    OptimConfig {
        learning_rate: 0.5,
        ..OptimConfig::default()
    }
}

fn run_cli(args: &[&str]) -> worldtree::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("worldtree").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    cli::run(cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

#[test]
fn zero_steps_returns_node_unchanged() {
    let tracks = TrackSet::new(interval(), vec![moving_track(0, Vec3::zero(), 0.1)]);
    let node = TreeNode::root(single_basis(0.0), init_points(&tracks));
    let out = optimize_node(&node, &tracks, &LossWeights::default(), &OptimConfig::default(), 0, 1).unwrap();
    assert_eq!(out, node);
}

#[test]
fn single_basis_learns_translating_track() {
    let tracks = TrackSet::new(interval(), vec![moving_track(0, Vec3::zero(), 0.1)]);
    let node = TreeNode::root(single_basis(0.0), init_points(&tracks));
    // the track loss is a mean over 10 observations; the canonical-frame pose
    // collects gradient from all of them, which bounds the usable step
    let config = small_lr();
    let out = optimize_node(&node, &tracks, &LossWeights::default(), &config, 200, 1).unwrap();
    let last = out.history.last().unwrap();
    assert_eq!(out.history.len(), 201);
    assert!(last.components.track < 1e-4, "track loss {}", last.components.track);
    assert!(out.final_loss.unwrap() < out.history[0].total);
}

#[test]
fn node_optimization_is_deterministic() {
    let tracks = TrackSet::new(
        interval(),
        vec![moving_track(0, Vec3::zero(), 0.1), moving_track(1, Vec3::new(1.0, 0.0, 0.0), -0.05)],
    );
    let bases = tracks
        .tracks
        .iter()
        .map(|t| {
            let poses = t.positions.iter().map(|&p| SE3Transform::from_translation(p)).collect();
            MotionBasis::new(1, poses, 1.0).unwrap()
        })
        .collect();
    let node = TreeNode::root(build_knn_graph(bases, 2).unwrap(), init_points(&tracks));
    let config = small_lr();
    let a = optimize_node(&node, &tracks, &LossWeights::default(), &config, 30, 5).unwrap();
    let b = optimize_node(&node, &tracks, &LossWeights::default(), &config, 30, 5).unwrap();
    assert_eq!(a.scaffold.to_params(), b.scaffold.to_params());
    assert_eq!(a, b);
}

#[test]
fn layers_select_heap_indices() {
    let tracks = TrackSet::new(interval(), vec![moving_track(0, Vec3::zero(), 0.1)]);
    let mut seen = Vec::new();
    let config = OptimConfig {
        steps_per_layer: vec![2],
        ..small_lr()
    };
    build_worldtree(
        single_basis(0.05),
        init_points(&tracks),
        &TreeConfig::default(),
        |n| partition_point_binary(n.interval),
        |tree, depth| {
            optimize_layer(tree, depth, &tracks, &LossWeights::default(), &config)?;
            seen.push(tree.layer(depth));
            assert!(tree.layer(depth).iter().all(|j| tree.nodes[j].history.len() == 3));
            Ok(())
        },
    )
    .unwrap();
    assert_eq!(seen, vec![vec![1], vec![2, 3], vec![4, 5, 6, 7]]);
}

#[test]
fn assembly_counts_every_level() {
    let pts = |n: usize, t: u32| -> Vec<ScenePoint> {
        (0..n).map(|i| ScenePoint::new(i as u64, Vec3::new(i as f64 * 0.01, 0.0, 0.0), t)).collect()
    };
    let graph = single_basis(0.1);
    let copy = |j: usize, n: usize| AncestorCopy {
        source_index: j,
        interval: interval(),
        scaffold: graph.clone(),
        points: pts(n, 1),
    };
    let node = TreeNode::new(4, graph.clone(), pts(100, 3), vec![copy(2, 200), copy(1, 300)]);
    assert_eq!(assemble_node(&node, 5).unwrap().len(), 600);

    let root = TreeNode::root(graph, pts(7, 2));
    let out = assemble_node(&root, 4).unwrap();
    assert_eq!(out.len(), 7);
    // the basis translates 0.1 per frame
    for (p, q) in out.iter().zip(&root.points) {
        assert!((p.position.x - q.position.x - 0.2).abs() < 1e-9);
        assert_eq!(p.source_node, 1);
    }
}

#[test]
fn perfect_model_scores_zero_on_training_tracks() {
    let tracks = TrackSet::new(
        interval(),
        vec![moving_track(0, Vec3::zero(), 0.1), moving_track(1, Vec3::new(0.0, 0.5, 0.0), 0.1)],
    );
    let tree = WorldTree::new(TreeNode::root(single_basis(0.1), init_points(&tracks)), 0);
    let report = evaluate(&tree, &tracks).unwrap();
    assert!(report.mean_rmse < 1e-12, "{}", report.mean_rmse);
    assert!(report.endpoint_error < 1e-12);
    assert_eq!(evaluate(&tree, &tracks).unwrap(), report);
}

#[test]
fn constant_prediction_error_matches_closed_form() {
    let mut last = 0.0;
    for amplitude in [0.01, 0.1, 1.0] {
        let tracks = TrackSet::new(interval(), vec![moving_track(0, Vec3::zero(), amplitude)]);
        // static scaffold: the prediction stays at the first observation
        let tree = WorldTree::new(TreeNode::root(single_basis(0.0), init_points(&tracks)), 0);
        let report = evaluate(&tree, &tracks).unwrap();
        let expected = ((0..FRAMES).map(|i| (amplitude * i as f64).powi(2)).sum::<f64>() / FRAMES as f64).sqrt();
        assert!((report.mean_rmse - expected).abs() < 1e-12);
        assert!((report.endpoint_error - amplitude * (FRAMES - 1) as f64).abs() < 1e-12);
        assert!(report.mean_rmse > last);
        last = report.mean_rmse;
    }
}

#[test]
fn per_leaf_errors_pool_to_overall() {
    let tracks = TrackSet::new(
        interval(),
        vec![moving_track(0, Vec3::zero(), 0.1), moving_track(1, Vec3::new(0.3, 0.0, 0.0), 0.02)],
    );
    let tree = build_worldtree(
        single_basis(0.05),
        init_points(&tracks),
        &TreeConfig {
            max_depth: 2,
            ..TreeConfig::default()
        },
        |n| partition_point_binary(n.interval),
        |_, _| Ok(()),
    )
    .unwrap();
    let report = evaluate(&tree, &tracks).unwrap();
    assert_eq!(report.per_interval_rmse.len(), 4);
    let (sq, n) = report
        .per_interval_rmse
        .iter()
        .fold((0.0, 0), |(s, n), (j, r)| (s + r * r * report.per_interval_count[j] as f64, n + report.per_interval_count[j]));
    assert_eq!(n, 20);
    assert!(((sq / n as f64).sqrt() - report.pooled_rmse).abs() < 1e-9);
}

#[test]
fn synth_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let args = ["synth", "--kind", "rigid", "--tracks", "50", "--frames", "40", "--seed", "7", "--out"];
        run_cli(&[&args[..], &[path.to_str().unwrap()]].concat()).unwrap();
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 50 * 40);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_worldtree");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let status = Process::new(bin)
        .args(["synth", "--kind", "rigid", "--tracks", "5", "--frames", "2", "--seed", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("InvalidSpec"));

    let status = Process::new(bin).args(["eval", "--tree"]).arg(dir.path().join("missing")).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn fit_eval_inspect_and_ablate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.csv");
    let scene = scene.to_str().unwrap();
    run_cli(&["synth", "--kind", "phase_switch", "--tracks", "40", "--frames", "16", "--seed", "3", "--out", scene])
        .unwrap();
    let fit = |out: &str, depth: &str| {
        let steps = vec!["4"; depth.parse::<usize>().unwrap() + 1].join(",");
        run_cli(&[
            "fit", "--tracks", scene, "--out", out, "--seed", "3", "--depth", depth, "--n_bases", "8", "--k", "4",
            "--steps_per_layer", &steps, "--learning_rate", "5",
        ])
        .unwrap()
    };
    let flat = dir.path().join("flat");
    let summary = fit(flat.to_str().unwrap(), "0");
    assert_eq!(summary.lines().filter(|l| l.starts_with("node=")).count(), 1);

    let deep = dir.path().join("deep");
    let deep = deep.to_str().unwrap();
    let first = fit(deep, "2");
    assert_eq!(first.lines().filter(|l| l.starts_with("node=")).count(), 7);
    let digest = first.lines().last().unwrap().to_string();
    assert!(digest.starts_with("tree_sha256="));
    assert_eq!(fit(deep, "2").lines().last().unwrap(), digest);
    assert!(dir.path().join("deep").join(TREE_FILE).exists());
    assert!(dir.path().join("deep/points/frame_00001.csv").exists());
    assert!(dir.path().join("deep/loss_7.csv").exists());

    let e1 = run_cli(&["eval", "--tree", deep]).unwrap();
    let e2 = run_cli(&["eval", "--tree", deep]).unwrap();
    assert_eq!(e1, e2);
    assert!(e1.starts_with("mean_rmse="));
    assert_eq!(run_cli(&["inspect", "--tree", deep]).unwrap().lines().count(), 7);

    let rows = run_cli(&[
        "ablate", "--tracks", scene, "--seed", "3", "--n_bases", "8", "--k", "4", "--steps_per_layer", "3,2,2",
        "--learning_rate", "5", "--variants", "flat,tpt_sac",
    ])
    .unwrap();
    let names: Vec<_> = rows.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, vec!["flat", "tpt_sac"]);
}
