//! Deterministic synthetic track scenes.
//!
//! Dynamic tracks are sampled around a three-segment chain lying along +x;
//! static background tracks lie on a plane below it. Every fifth track id
//! (`id % 5 == 4`) is background.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::tracks::{Track, TrackSet};
use crate::error::{Error, Result};
use crate::geometry::{Quaternion, SE3Transform, Vec3};
use crate::interval::{Frame, TimeInterval};

const SEGMENT_LENGTH: f64 = 0.4;
const SEGMENT_HALF_WIDTH: f64 = 0.06;
const JOINT_AMPLITUDES: [f64; 3] = [0.35, 0.7, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    Rigid,
    ArticulatedChain,
    PhaseSwitch,
}

impl FromStr for SceneKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rigid" => Ok(Self::Rigid),
            "articulated_chain" => Ok(Self::ArticulatedChain),
            "phase_switch" => Ok(Self::PhaseSwitch),
            other => Err(Error::InvalidSpec(format!("unknown scene kind `{other}`"))),
        }
    }
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rigid => "rigid",
            Self::ArticulatedChain => "articulated_chain",
            Self::PhaseSwitch => "phase_switch",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SceneKind,
    pub n_tracks: usize,
    pub n_frames: usize,
    pub noise_sigma: f64,
    /// Fraction of the sequence after which the phase-switch scene starts bending.
    pub phase_boundary: Option<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SceneKind, n_tracks: usize, n_frames: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            kind,
            n_tracks,
            n_frames,
            noise_sigma,
            phase_boundary: None,
            seed,
        }
    }

    /// The phase-switch scene used throughout the acceptance experiments:
    /// 75 tracks (60 dynamic), 40 frames, σ = 0.005.
    pub fn bundled_phase_switch(seed: u64) -> Self {
        Self::new(SceneKind::PhaseSwitch, 75, 40, 0.005, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames < 4 {
            return Err(Error::InvalidSpec(format!("n_frames = {} (need >= 4)", self.n_frames)));
        }
        if self.n_tracks == 0 {
            return Err(Error::InvalidSpec("n_tracks must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!("noise_sigma = {}", self.noise_sigma)));
        }
        if let Some(b) = self.phase_boundary {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidSpec(format!("phase_boundary = {b} (need 0 < b < 1)")));
            }
        }
        Ok(())
    }

    /// First frame of the bending phase.
    pub fn switch_frame(&self) -> Frame {
        let b = self.phase_boundary.unwrap_or(0.5);
        ((b * self.n_frames as f64).floor() as Frame).max(2)
    }
}

pub fn is_background_id(id: u64) -> bool {
    id % 5 == 4
}

/// Where a dynamic sample sits on the chain: segment and local offset from the segment's joint.
#[derive(Clone, Copy)]
struct ChainSample {
    segment: usize,
    local: Vec3,
}

/// Joint angles (about +z) and global rigid motion of the chain at normalized time `s`.
fn chain_pose(kind: SceneKind, t: Frame, spec: &SyntheticSpec) -> ([f64; 3], SE3Transform) {
    let n = spec.n_frames as f64;
    let s = (t as f64 - 1.0) / (n - 1.0);
    match kind {
        SceneKind::Rigid => {
            let rot = Quaternion::from_axis_angle(Vec3::new(0.3, 1.0, 0.2), 0.6 * s);
            let tr = Vec3::new(0.5 * s, 0.2 * (PI * s).sin(), 0.1 * s);
            ([0.0; 3], SE3Transform::new(rot, tr))
        }
        SceneKind::ArticulatedChain => {
            let phases = [0.0, 0.8, 1.6];
            let mut angles = [0.0; 3];
            for k in 0..3 {
                angles[k] = JOINT_AMPLITUDES[k] * (2.0 * PI * s + phases[k]).sin();
            }
            (angles, SE3Transform::from_translation(Vec3::new(0.1 * s, 0.0, 0.0)))
        }
        SceneKind::PhaseSwitch => {
            let b = spec.switch_frame();
            let speed = Vec3::new(0.02, 0.008, 0.0);
            if t < b {
                ([0.0; 3], SE3Transform::from_translation(speed * (t - 1) as f64))
            } else {
                let u = (t - b) as f64 / (spec.n_frames as f64 - b as f64).max(1.0);
                let bend = (FRAC_PI_2 * u).sin();
                let mut angles = [0.0; 3];
                for k in 0..3 {
                    angles[k] = JOINT_AMPLITUDES[k] * bend;
                }
                (angles, SE3Transform::from_translation(speed * (b - 1) as f64))
            }
        }
    }
}

fn place(sample: ChainSample, angles: [f64; 3], global: &SE3Transform) -> Vec3 {
    let z = Vec3::new(0.0, 0.0, 1.0);
    let mut joint = Vec3::zero();
    let mut heading = 0.0;
    for (seg, angle) in angles.iter().enumerate().take(sample.segment + 1) {
        heading += angle;
        let rot = Quaternion::from_axis_angle(z, heading);
        if seg == sample.segment {
            return global.apply(joint + rot.rotate(sample.local));
        }
        joint = joint + rot.rotate(Vec3::new(SEGMENT_LENGTH, 0.0, 0.0));
    }
    unreachable!()
}

/// Generates a synthetic scene; identical specs give bit-identical output.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<TrackSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frames = TimeInterval::new(1, spec.n_frames as Frame)?;
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");

    enum Kind {
        Dynamic(ChainSample),
        Static(Vec3),
    }
    let mut dyn_count = 0usize;
    let layout: Vec<Kind> = (0..spec.n_tracks as u64)
        .map(|id| {
            if is_background_id(id) {
                Kind::Static(Vec3::new(
                    rng.random_range(-0.8..2.0),
                    rng.random_range(-1.0..1.0),
                    -0.5 + rng.random_range(-0.05..0.05),
                ))
            } else {
                let segment = dyn_count % 3;
                dyn_count += 1;
                Kind::Dynamic(ChainSample {
                    segment,
                    local: Vec3::new(
                        rng.random_range(0.0..SEGMENT_LENGTH),
                        rng.random_range(-SEGMENT_HALF_WIDTH..SEGMENT_HALF_WIDTH),
                        rng.random_range(-SEGMENT_HALF_WIDTH..SEGMENT_HALF_WIDTH),
                    ),
                })
            }
        })
        .collect();

    let poses: Vec<_> = frames.frames().map(|t| chain_pose(spec.kind, t, spec)).collect();
    let tracks = layout
        .iter()
        .enumerate()
        .map(|(id, kind)| {
            let positions = poses
                .iter()
                .map(|(angles, global)| {
                    let clean = match kind {
                        Kind::Dynamic(sample) => place(*sample, *angles, global),
                        Kind::Static(p) => *p,
                    };
                    if spec.noise_sigma > 0.0 {
                        clean + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng))
                    } else {
                        clean
                    }
                })
                .collect();
            Track::new(id as u64, positions, vec![true; frames.len()])
        })
        .collect();
    Ok(TrackSet::new(frames, tracks))
}
