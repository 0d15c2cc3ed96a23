use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Frame, TimeInterval};
use crate::scene::TrackSet;
use crate::tree::{partition_point_binary, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    #[default]
    Binary,
    /// Balance summed track displacement on both sides.
    Flow,
    /// Balance the gradient norms recorded while training the node.
    Gradient,
}

impl SplitStrategy {
    pub fn split(self, node: &TreeNode, tracks: &TrackSet) -> Result<Frame> {
        match self {
            Self::Binary => split_binary(node),
            Self::Flow => split_flow(node, tracks),
            Self::Gradient => split_gradient(node),
        }
    }
}

impl FromStr for SplitStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Self::Binary),
            "flow" => Ok(Self::Flow),
            "gradient" => Ok(Self::Gradient),
            other => Err(Error::InvalidConfig(format!("unknown split `{other}`"))),
        }
    }
}

impl fmt::Display for SplitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Binary => "binary",
            Self::Flow => "flow",
            Self::Gradient => "gradient",
        })
    }
}

pub fn split_binary(node: &TreeNode) -> Result<Frame> {
    partition_point_binary(node.interval)
}

/// `T_P ∈ [L + 1, R]` minimizing `|Σ_{t<T_P} s_t − Σ_{t≥T_P} s_t|`, where
/// `stats[i]` belongs to frame `L + i`; the earliest frame wins ties.
pub fn balanced_split(interval: TimeInterval, stats: &[f64]) -> Result<Frame> {
    if interval.len() < 2 {
        return Err(Error::IntervalTooShort {
            left: interval.left,
            right: interval.right,
        });
    }
    let total: f64 = stats.iter().sum();
    let mut left = 0.0;
    let mut best = (f64::INFINITY, interval.left + 1);
    for tp in interval.left + 1..=interval.right {
        left += stats.get((tp - 1 - interval.left) as usize).copied().unwrap_or(0.0);
        let gap = (left - (total - left)).abs();
        if gap < best.0 {
            best = (gap, tp);
        }
    }
    Ok(best.1)
}

/// Mean displacement of dynamic tracks visible at both `t` and `t + 1`, for
/// `t ∈ [L, R − 1]`.
pub fn flow_magnitudes(tracks: &TrackSet, interval: TimeInterval) -> Vec<f64> {
    (interval.left..interval.right)
        .map(|t| {
            let (sum, n) = tracks
                .dynamic_tracks()
                .filter_map(|tr| Some((tracks.observation(tr, t + 1)? - tracks.observation(tr, t)?).norm()))
                .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect()
}

pub fn split_flow(node: &TreeNode, tracks: &TrackSet) -> Result<Frame> {
    balanced_split(node.interval, &flow_magnitudes(tracks, node.interval))
}

pub fn split_gradient(node: &TreeNode) -> Result<Frame> {
    balanced_split(node.interval, &node.frame_gradients)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_balance_example() {
        let i = TimeInterval::new(1, 6).unwrap();
        assert_eq!(balanced_split(i, &[0.0, 0.0, 0.0, 10.0, 10.0]).unwrap(), 5);
    }

    #[test]
    fn uniform_stats_match_binary() {
        for left in 1..4u32 {
            for len in 2..60u32 {
                let i = TimeInterval::new(left, left + len - 1).unwrap();
                let flow = balanced_split(i, &vec![1.0; (len - 1) as usize]).unwrap();
                assert_eq!(flow, partition_point_binary(i).unwrap(), "{i:?}");
            }
        }
    }

    #[test]
    fn result_always_inside_interval() {
        let i = TimeInterval::new(3, 9).unwrap();
        for stats in [vec![], vec![0.0; 7], vec![100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 9.0]] {
            let tp = balanced_split(i, &stats).unwrap();
            assert!(tp > i.left && tp <= i.right);
        }
        assert!(matches!(
            balanced_split(TimeInterval::new(3, 3).unwrap(), &[]),
            Err(Error::IntervalTooShort { .. })
        ));
    }
}
