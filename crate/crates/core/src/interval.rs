use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer frame index.
pub type Frame = u32;

/// Inclusive frame interval `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    pub left: Frame,
    pub right: Frame,
}

impl TimeInterval {
    pub fn new(left: Frame, right: Frame) -> Result<Self> {
        if left > right {
            return Err(Error::IntervalTooShort { left, right });
        }
        Ok(Self { left, right })
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        (self.right - self.left) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: Frame) -> bool {
        self.left <= t && t <= self.right
    }

    pub fn contains_interval(&self, other: &TimeInterval) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    pub fn frames(&self) -> impl DoubleEndedIterator<Item = Frame> + Clone {
        self.left..=self.right
    }

    pub fn intersect(&self, other: &TimeInterval) -> Option<TimeInterval> {
        let left = self.left.max(other.left);
        let right = self.right.min(other.right);
        (left <= right).then_some(TimeInterval { left, right })
    }

    pub(crate) fn check(&self, t: Frame) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::FrameOutOfRange {
                frame: t,
                left: self.left,
                right: self.right,
            })
        }
    }
}
