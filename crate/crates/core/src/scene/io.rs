//! Track CSV and per-frame point cloud files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::tracks::{Track, TrackSet};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::interval::{Frame, TimeInterval};
use crate::scaffold::DeformedPoint;

pub const TRACK_HEADER: &str = "track_id,frame,x,y,z,visible";
pub const POINT_HEADER: &str = "id,x,y,z,opacity,r,g,b,source_node";

/// Renders a track set, one row per (track, frame). `f64` display is the
/// shortest representation that parses back to the same bits.
pub fn write_tracks_csv(tracks: &TrackSet) -> String {
    let mut out = String::with_capacity(64 * tracks.len() * tracks.frames.len() + 32);
    out.push_str(TRACK_HEADER);
    out.push('\n');
    for track in &tracks.tracks {
        for (i, t) in tracks.frames.frames().enumerate() {
            let p = track.positions[i];
            let _ = writeln!(out, "{},{},{},{},{},{}", track.id, t, p.x, p.y, p.z, u8::from(track.visible[i]));
        }
    }
    out
}

pub fn parse_tracks_csv(text: &str) -> Result<TrackSet> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACK_HEADER => {}
        _ => return Err(Error::MissingHeader(TRACK_HEADER)),
    }
    struct Row {
        frame: Frame,
        pos: Vec3,
        visible: bool,
    }
    let mut order: Vec<u64> = Vec::new();
    let mut rows: HashMap<u64, Vec<Row>> = HashMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let id: u64 = fields[0].parse().map_err(|_| err(format!("bad track_id `{}`", fields[0])))?;
        let frame: Frame = fields[1].parse().map_err(|_| err(format!("bad frame `{}`", fields[1])))?;
        let mut xyz = [0.0; 3];
        for (k, f) in fields[2..5].iter().enumerate() {
            xyz[k] = f.parse().map_err(|_| err(format!("bad coordinate `{f}`")))?;
        }
        let visible = match fields[5] {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("visible must be 0 or 1, found `{other}`"))),
        };
        let pos = Vec3::from(xyz);
        if visible && !pos.is_finite() {
            return Err(err("visible observation is not finite".into()));
        }
        let entry = rows.entry(id).or_insert_with(|| {
            order.push(id);
            Vec::new()
        });
        if entry.last().is_some_and(|r| r.frame >= frame) {
            return Err(Error::NonContiguousFrames { track: id, line });
        }
        entry.push(Row { frame, pos, visible });
    }
    let all = rows.values().flatten();
    let (lo, hi) = all.fold((Frame::MAX, Frame::MIN), |(lo, hi), r| (lo.min(r.frame), hi.max(r.frame)));
    if order.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no track rows".into(),
        });
    }
    let frames = TimeInterval::new(lo, hi)?;
    let tracks = order
        .into_iter()
        .map(|id| {
            let mut positions = vec![Vec3::zero(); frames.len()];
            let mut visible = vec![false; frames.len()];
            for r in &rows[&id] {
                let i = (r.frame - lo) as usize;
                positions[i] = r.pos;
                visible[i] = r.visible;
            }
            Track::new(id, positions, visible)
        })
        .collect();
    Ok(TrackSet::new(frames, tracks))
}

pub fn save_tracks(tracks: &TrackSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_tracks_csv(tracks))?;
    Ok(())
}

pub fn load_tracks(path: impl AsRef<Path>) -> Result<TrackSet> {
    parse_tracks_csv(&fs::read_to_string(path)?)
}

pub fn write_points_csv(points: &[DeformedPoint]) -> String {
    let mut out = String::new();
    out.push_str(POINT_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.id, p.position.x, p.position.y, p.position.z, p.opacity, p.color[0], p.color[1], p.color[2], p.source_node
        );
    }
    out
}

/// File name of the point cloud for frame `t`.
pub fn frame_file_name(t: Frame) -> String {
    format!("frame_{t:05}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_row_names_its_line() {
        let text = format!("{TRACK_HEADER}\n0,1,0,0,0,1\n0,2,0,zero,0,1\n");
        match parse_tracks_csv(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_is_required() {
        assert_eq!(parse_tracks_csv("0,1,0,0,0,1\n"), Err(Error::MissingHeader(TRACK_HEADER)));
    }

    #[test]
    fn missing_frame_becomes_invisible() {
        let text = format!("{TRACK_HEADER}\n7,1,0,0,0,1\n7,2,1,0,0,1\n7,4,3,0,0,1\n");
        let set = parse_tracks_csv(&text).unwrap();
        assert_eq!(set.frames, TimeInterval::new(1, 4).unwrap());
        assert_eq!(set.tracks[0].visible, vec![true, true, false, true]);
    }

    #[test]
    fn descending_frames_rejected() {
        let text = format!("{TRACK_HEADER}\n7,2,0,0,0,1\n7,1,1,0,0,1\n");
        assert_eq!(parse_tracks_csv(&text), Err(Error::NonContiguousFrames { track: 7, line: 3 }));
    }

    #[test]
    fn frame_names_are_zero_padded() {
        assert_eq!(frame_file_name(7), "frame_00007.csv");
    }
}
