use crate::geometry::Vec3;
use crate::interval::{Frame, TimeInterval};

/// One observed 3D trajectory, stored densely over its track set's frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    /// Position per frame of the owning set's range; meaningful only where visible.
    pub positions: Vec<Vec3>,
    pub visible: Vec<bool>,
    /// `Some(true)` once classified as moving.
    pub dynamic: Option<bool>,
}

impl Track {
    pub fn new(id: u64, positions: Vec<Vec3>, visible: Vec<bool>) -> Self {
        assert_eq!(positions.len(), visible.len());
        Self {
            id,
            positions,
            visible,
            dynamic: None,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.dynamic.unwrap_or(true)
    }
}

/// Observed trajectories over a shared frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    pub frames: TimeInterval,
    pub tracks: Vec<Track>,
}

impl TrackSet {
    pub fn new(frames: TimeInterval, tracks: Vec<Track>) -> Self {
        debug_assert!(tracks.iter().all(|t| t.positions.len() == frames.len()));
        Self { frames, tracks }
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Track> {
        self.tracks.iter().find(|t| t.id == id)
    }

    /// Visible observation of `track` at `t`.
    pub fn observation(&self, track: &Track, t: Frame) -> Option<Vec3> {
        if !self.frames.contains(t) {
            return None;
        }
        let i = (t - self.frames.left) as usize;
        track.visible[i].then_some(track.positions[i])
    }

    pub fn first_visible(&self, track: &Track) -> Option<(Frame, Vec3)> {
        track
            .visible
            .iter()
            .position(|&v| v)
            .map(|i| (self.frames.left + i as Frame, track.positions[i]))
    }

    pub fn last_visible(&self, track: &Track) -> Option<(Frame, Vec3)> {
        track
            .visible
            .iter()
            .rposition(|&v| v)
            .map(|i| (self.frames.left + i as Frame, track.positions[i]))
    }

    /// Visible `(frame, position)` pairs of `track`, ascending.
    pub fn visible_observations<'a>(&'a self, track: &'a Track) -> impl Iterator<Item = (Frame, Vec3)> + 'a {
        track
            .visible
            .iter()
            .zip(&track.positions)
            .enumerate()
            .filter(|(_, (v, _))| **v)
            .map(move |(i, (_, p))| (self.frames.left + i as Frame, *p))
    }

    /// Positions with invisible frames linearly interpolated between visible
    /// neighbors and held constant past the first/last visible frame.
    pub fn filled_positions(&self, track: &Track) -> Option<Vec<Vec3>> {
        let vis: Vec<usize> = (0..track.visible.len()).filter(|&i| track.visible[i]).collect();
        let (&first, &last) = (vis.first()?, vis.last()?);
        let mut out = track.positions.clone();
        for p in out.iter_mut().take(first) {
            *p = track.positions[first];
        }
        for p in out.iter_mut().skip(last + 1) {
            *p = track.positions[last];
        }
        for pair in vis.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for (i, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
                let s = (i - a) as f64 / (b - a) as f64;
                *slot = track.positions[a] * (1.0 - s) + track.positions[b] * s;
            }
        }
        Some(out)
    }

    pub fn dynamic_tracks(&self) -> impl Iterator<Item = &Track> {
        self.tracks.iter().filter(|t| t.is_dynamic())
    }

    pub fn subset(&self, keep: impl Fn(&Track) -> bool) -> TrackSet {
        TrackSet {
            frames: self.frames,
            tracks: self.tracks.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }

    /// Splits dynamic tracks into (training, held-out) by withholding every
    /// `stride`-th one; static tracks stay in the training set.
    pub fn split_heldout(&self, stride: usize) -> (TrackSet, TrackSet) {
        let mut train = Vec::new();
        let mut heldout = Vec::new();
        let mut k = 0usize;
        for t in &self.tracks {
            if t.is_dynamic() {
                k += 1;
                if stride > 0 && k.is_multiple_of(stride) {
                    heldout.push(t.clone());
                    continue;
                }
            }
            train.push(t.clone());
        }
        (TrackSet::new(self.frames, train), TrackSet::new(self.frames, heldout))
    }
}
