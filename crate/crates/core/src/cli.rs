//! Command-line front end: `synth`, `fit`, `eval`, `ablate`, `inspect`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimize::{GradientMode, SplitStrategy, LOSS_CSV_HEADER};
use crate::pipeline::{fit_worldtree, FitConfig, FitOutput};
use crate::scene::io::{frame_file_name, write_points_csv};
use crate::scene::{evaluate, generate_synthetic, load_tracks, save_tracks, SceneKind, SyntheticSpec};
use crate::tree::{assemble_node, WorldTree};

pub const TREE_FILE: &str = "tree.json";
pub const HELDOUT_FILE: &str = "heldout.csv";
pub const INSPECT_FILE: &str = "inspect.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const REPORT_FILE: &str = "report.csv";
pub const ABLATION_HEADER: &str = "variant,depth,train_chain,mean_rmse,endpoint,pooled_rmse";

#[derive(Debug, Parser)]
#[command(name = "worldtree", version, about = "Fit temporal deformation trees to 3D point tracks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic track scene.
    Synth(SynthArgs),
    /// Fit a tree to a track file.
    Fit(FitArgs),
    /// Score a fitted tree on held-out tracks.
    Eval(EvalArgs),
    /// Compare flat, frozen-chain and full trees plus a depth sweep.
    Ablate(AblateArgs),
    /// Print one line per node of a fitted tree.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub tracks: usize,
    #[arg(long)]
    pub frames: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    #[arg(long = "phase_boundary")]
    pub phase_boundary: Option<f64>,
}

/// Config keys settable from the command line; these override the file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long = "n_bases")]
    pub n_bases: Option<String>,
    #[arg(long)]
    pub caps: Option<String>,
    #[arg(long = "opacity_reset")]
    pub opacity_reset: Option<String>,
    #[arg(long = "lambda_track")]
    pub lambda_track: Option<String>,
    #[arg(long = "lambda_arap")]
    pub lambda_arap: Option<String>,
    #[arg(long = "lambda_acc")]
    pub lambda_acc: Option<String>,
    #[arg(long = "lambda_vel")]
    pub lambda_vel: Option<String>,
    #[arg(long = "steps_per_layer")]
    pub steps_per_layer: Option<String>,
    #[arg(long = "learning_rate")]
    pub learning_rate: Option<String>,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long = "static_epsilon")]
    pub static_epsilon: Option<String>,
    #[arg(long = "heldout_stride")]
    pub heldout_stride: Option<String>,
    #[arg(long = "gradient_mode")]
    pub gradient_mode: Option<String>,
    #[arg(long = "fd_epsilon")]
    pub fd_epsilon: Option<String>,
    #[arg(long = "train_chain")]
    pub train_chain: Option<String>,
    #[arg(long = "child_track_loss")]
    pub child_track_loss: Option<String>,
    #[arg(long)]
    pub exec: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        [
            ("depth", &self.depth),
            ("k", &self.k),
            ("n_bases", &self.n_bases),
            ("caps", &self.caps),
            ("opacity_reset", &self.opacity_reset),
            ("lambda_track", &self.lambda_track),
            ("lambda_arap", &self.lambda_arap),
            ("lambda_acc", &self.lambda_acc),
            ("lambda_vel", &self.lambda_vel),
            ("steps_per_layer", &self.steps_per_layer),
            ("learning_rate", &self.learning_rate),
            ("split", &self.split),
            ("static_epsilon", &self.static_epsilon),
            ("heldout_stride", &self.heldout_stride),
            ("gradient_mode", &self.gradient_mode),
            ("fd_epsilon", &self.fd_epsilon),
            ("train_chain", &self.train_chain),
            ("child_track_loss", &self.child_track_loss),
            ("exec", &self.exec),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Output directory of `fit`.
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub heldout: Option<PathBuf>,
    /// Report destination; defaults to `<tree>/report.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated subset of flat,tpt_frozen,tpt_sac,depth_0,depth_1,depth_2.
    #[arg(long)]
    pub variants: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub tree: PathBuf,
}

/// Parsed `key = value` configuration. `steps_per_layer` follows the depth
/// unless set explicitly.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub fit: FitConfig,
    explicit_steps: bool,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::InvalidConfig(format!("{key}: expected true/false, found `{other}`"))),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected `key = value`, found `{line}`")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let f = &mut self.fit;
        match key {
            "depth" => f.tree.max_depth = parse_num(key, value)?,
            "k" => f.k = parse_num(key, value)?,
            "n_bases" => f.n_bases = parse_num(key, value)?,
            "caps" => {
                f.tree.caps = value
                    .split(',')
                    .map(|v| match v.trim() {
                        "inf" | "none" => Ok(None),
                        n => parse_num(key, n).map(Some),
                    })
                    .collect::<Result<_>>()?
            }
            "opacity_reset" => f.tree.opacity_reset = parse_num(key, value)?,
            "lambda_track" => f.weights.track = parse_num(key, value)?,
            "lambda_arap" => f.weights.arap = parse_num(key, value)?,
            "lambda_acc" => f.weights.acc = parse_num(key, value)?,
            "lambda_vel" => f.weights.vel = parse_num(key, value)?,
            "steps_per_layer" => {
                f.optim.steps_per_layer = parse_list(key, value)?;
                self.explicit_steps = true;
            }
            "learning_rate" => f.optim.learning_rate = parse_num(key, value)?,
            "seed" => f.optim.seed = parse_num(key, value)?,
            "split" => f.split = value.parse::<SplitStrategy>()?,
            "static_epsilon" => f.static_epsilon = parse_num(key, value)?,
            "heldout_stride" => f.heldout_stride = parse_num(key, value)?,
            "gradient_mode" => f.optim.gradient_mode = value.parse::<GradientMode>()?,
            "fd_epsilon" => f.optim.fd_epsilon = parse_num(key, value)?,
            "train_chain" => f.optim.train_chain = parse_bool(key, value)?,
            "child_track_loss" => f.optim.child_track_loss = parse_bool(key, value)?,
            "exec" => f.optim.exec = value.parse()?,
            other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies overrides and the seed, then validates.
    pub fn resolve(mut self, overrides: &Overrides, seed: u64) -> Result<FitConfig> {
        for (k, v) in overrides.pairs() {
            self.set(k, v)?;
        }
        self.fit.optim.seed = seed;
        let mut fit = self.fit;
        if !self.explicit_steps {
            fit = fit.with_depth(fit.tree.max_depth);
        }
        fit.validate()?;
        Ok(fit)
    }
}

/// Renders a configuration in the same `key = value` format.
pub fn render_config(c: &FitConfig) -> String {
    let list = |v: Vec<String>| v.join(",");
    let caps = list(c.tree.caps.iter().map(|c| c.map_or("inf".into(), |n| n.to_string())).collect());
    let steps = list(c.optim.steps_per_layer.iter().map(|s| s.to_string()).collect());
    let mut out = String::new();
    for (k, v) in [
        ("depth", c.tree.max_depth.to_string()),
        ("k", c.k.to_string()),
        ("n_bases", c.n_bases.to_string()),
        ("caps", caps),
        ("opacity_reset", c.tree.opacity_reset.to_string()),
        ("lambda_track", c.weights.track.to_string()),
        ("lambda_arap", c.weights.arap.to_string()),
        ("lambda_acc", c.weights.acc.to_string()),
        ("lambda_vel", c.weights.vel.to_string()),
        ("steps_per_layer", steps),
        ("learning_rate", c.optim.learning_rate.to_string()),
        ("seed", c.optim.seed.to_string()),
        ("split", c.split.to_string()),
        ("static_epsilon", c.static_epsilon.to_string()),
        ("heldout_stride", c.heldout_stride.to_string()),
        ("gradient_mode", c.optim.gradient_mode.to_string()),
        ("fd_epsilon", c.optim.fd_epsilon.to_string()),
        ("train_chain", c.optim.train_chain.to_string()),
        ("child_track_loss", c.optim.child_track_loss.to_string()),
        ("exec", c.optim.exec.to_string()),
    ] {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

fn load_config(path: Option<&Path>, overrides: &Overrides, seed: u64) -> Result<FitConfig> {
    let base = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    base.resolve(overrides, seed)
}

/// Process exit code for an error: 3 for numerical failure, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFiniteObjective(_) | Error::NonFiniteComponent(_) | Error::AllZeroWeights => 3,
        _ => 2,
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Ablate(a) => cmd_ablate(&a, out),
        Command::Inspect(a) => cmd_inspect(&a, out),
    }
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let kind: SceneKind = a.kind.parse()?;
    let mut spec = SyntheticSpec::new(kind, a.tracks, a.frames, a.noise, a.seed);
    spec.phase_boundary = a.phase_boundary;
    let tracks = generate_synthetic(&spec)?;
    save_tracks(&tracks, &a.out)?;
    writeln!(out, "wrote {} tracks x {} frames to {}", tracks.len(), tracks.frames.len(), a.out.display())?;
    Ok(())
}

/// Writes every artifact of a fit into `dir` and returns the tree digest.
pub fn write_fit(dir: &Path, fit: &FitOutput, config: &FitConfig) -> Result<String> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string(&fit.tree).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(TREE_FILE), &json)?;
    save_tracks(&fit.heldout, dir.join(HELDOUT_FILE))?;
    fs::write(dir.join(INSPECT_FILE), fit.tree.inspect())?;
    fs::write(dir.join(CONFIG_FILE), render_config(config))?;
    for node in fit.tree.nodes.values() {
        let mut csv = format!("{LOSS_CSV_HEADER}\n");
        for r in &node.history {
            csv.push_str(&r.csv_row());
            csv.push('\n');
        }
        fs::write(dir.join(format!("loss_{}.csv", node.index)), csv)?;
    }
    let points_dir = dir.join("points");
    fs::create_dir_all(&points_dir)?;
    for t in fit.tree.interval().frames() {
        let mut pts = assemble_node(fit.tree.leaf_for(t)?, t)?;
        pts.extend(fit.tree.background.iter().map(|p| crate::scaffold::DeformedPoint {
            id: p.id,
            position: p.position,
            rotation: p.rotation,
            scale: p.scale,
            opacity: p.opacity,
            color: p.color,
            time: t,
            source_node: 0,
        }));
        fs::write(points_dir.join(frame_file_name(t)), write_points_csv(&pts))?;
    }
    Ok(hex::encode(Sha256::digest(json.as_bytes())))
}

pub fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let config = load_config(a.config.as_deref(), &a.overrides, a.seed)?;
    let tracks = load_tracks(&a.tracks)?;
    let fit = fit_worldtree(&tracks, &config)?;
    let digest = write_fit(&a.out, &fit, &config)?;
    write!(out, "{}", fit.tree.inspect())?;
    writeln!(out, "tree_sha256={digest}")?;
    Ok(())
}

pub fn load_tree(dir: &Path) -> Result<WorldTree> {
    let text = fs::read_to_string(dir.join(TREE_FILE))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let tree = load_tree(&a.tree)?;
    let heldout_path = a.heldout.clone().unwrap_or_else(|| a.tree.join(HELDOUT_FILE));
    let heldout = load_tracks(heldout_path)?;
    let report = evaluate(&tree, &heldout)?;
    let dest = a.out.clone().unwrap_or_else(|| a.tree.join(REPORT_FILE));
    fs::write(dest, report.to_csv())?;
    writeln!(out, "{}", report.summary_line())?;
    Ok(())
}

/// One ablation variant: label, depth, chain training.
pub fn ablation_variants(depth: u32) -> Vec<(&'static str, u32, bool)> {
    vec![
        ("flat", 0, true),
        ("tpt_frozen", depth, false),
        ("tpt_sac", depth, true),
        ("depth_0", 0, true),
        ("depth_1", 1, true),
        ("depth_2", 2, true),
    ]
}

pub fn cmd_ablate(a: &AblateArgs, out: &mut dyn Write) -> Result<()> {
    let config = load_config(a.config.as_deref(), &a.overrides, a.seed)?;
    let tracks = load_tracks(&a.tracks)?;
    let mut variants = ablation_variants(config.tree.max_depth);
    if let Some(list) = &a.variants {
        let wanted: Vec<&str> = list.split(',').map(str::trim).collect();
        if let Some(bad) = wanted.iter().find(|w| !variants.iter().any(|v| v.0 == **w)) {
            return Err(Error::InvalidConfig(format!("unknown variant `{bad}`")));
        }
        variants.retain(|v| wanted.contains(&v.0));
    }
    let mut cache: Vec<((u32, bool), crate::scene::EvalReport)> = Vec::new();
    let mut csv = format!("{ABLATION_HEADER}\n");
    for (name, depth, train_chain) in variants {
        // a flat tree has no chains, so chain training is irrelevant there
        let key = (depth, train_chain || depth == 0);
        let report = match cache.iter().find(|(k, _)| *k == key) {
            Some((_, r)) => r.clone(),
            None => {
                let mut c = config.with_depth(depth);
                c.optim.train_chain = train_chain;
                let r = fit_worldtree(&tracks, &c)?.evaluate()?;
                cache.push((key, r.clone()));
                r
            }
        };
        let _ = writeln!(
            csv,
            "{name},{depth},{train_chain},{},{},{}",
            report.mean_rmse, report.endpoint_error, report.pooled_rmse
        );
    }
    if let Some(p) = &a.out {
        fs::write(p, &csv)?;
    }
    write!(out, "{csv}")?;
    Ok(())
}

pub fn cmd_inspect(a: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    let tree = load_tree(&a.tree)?;
    write!(out, "{}", tree.inspect())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_text() {
        let mut cfg = RunConfig::parse("depth = 1  # shallow\nlearning_rate = 5\ncaps = inf,300\nsplit = flow\n").unwrap();
        cfg.set("train_chain", "false").unwrap();
        let fit = cfg.resolve(&Overrides::default(), 3).unwrap();
        assert_eq!(fit.tree.max_depth, 1);
        assert_eq!(fit.optim.steps_per_layer.len(), 2);
        assert_eq!(fit.tree.caps, vec![None, Some(300)]);
        assert_eq!(fit.split, SplitStrategy::Flow);
        assert!(!fit.optim.train_chain);
        let again = RunConfig::parse(&render_config(&fit)).unwrap().resolve(&Overrides::default(), 3).unwrap();
        assert_eq!(again, fit);
    }

    #[test]
    fn unknown_and_out_of_domain_keys_rejected() {
        assert!(matches!(RunConfig::parse("colour = red"), Err(Error::InvalidConfig(_))));
        assert!(matches!(RunConfig::parse("depth 2"), Err(Error::InvalidConfig(_))));
        let cfg = RunConfig::parse("lambda_arap = -1").unwrap();
        assert!(matches!(cfg.resolve(&Overrides::default(), 0), Err(Error::InvalidConfig(_))));
        let cfg = RunConfig::parse("depth = 2\nsteps_per_layer = 10,10").unwrap();
        assert!(matches!(cfg.resolve(&Overrides::default(), 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn flags_override_file() {
        let cfg = RunConfig::parse("k = 4\nseed = 1").unwrap();
        let o = Overrides {
            k: Some("6".into()),
            ..Overrides::default()
        };
        let fit = cfg.resolve(&o, 9).unwrap();
        assert_eq!(fit.k, 6);
        assert_eq!(fit.optim.seed, 9);
    }

    #[test]
    fn numerical_errors_exit_three() {
        assert_eq!(exit_code(&Error::NonFiniteObjective(f64::NAN)), 3);
        assert_eq!(exit_code(&Error::InvalidSpec("x".into())), 2);
    }
}
