use thiserror::Error;

use crate::Frame;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("EmptyBlendSet: blend requires at least one transform with a matching weight")]
    EmptyBlendSet,
    #[error("AllZeroWeights: every blend weight is zero")]
    AllZeroWeights,
    #[error("DisjointFrameRanges: motion bases share no frames")]
    DisjointFrameRanges,
    #[error("KTooLarge: k = {k} exceeds the number of bases ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("NonPositiveRadius: radius {0} must be > 0")]
    NonPositiveRadius(f64),
    #[error("FrameOutOfRange: frame {frame} outside [{left}, {right}]")]
    FrameOutOfRange { frame: Frame, left: Frame, right: Frame },
    #[error("IntervalTooShort: interval [{left}, {right}] is too short")]
    IntervalTooShort { left: Frame, right: Frame },
    #[error("PartitionOutOfRange: partition point {point} not inside ({left}, {right}]")]
    PartitionOutOfRange { point: Frame, left: Frame, right: Frame },
    #[error("MissingAncestor: node {0} is not in the tree")]
    MissingAncestor(usize),
    #[error("NoVisibleObservations: no visible track observations in [{left}, {right}]")]
    NoVisibleObservations { left: Frame, right: Frame },
    #[error("NonFiniteComponent: loss component {0} is not finite")]
    NonFiniteComponent(&'static str),
    #[error("NonFiniteObjective: objective evaluated to {0}")]
    NonFiniteObjective(f64),
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("TooFewDynamicTracks: need {needed}, found {found}")]
    TooFewDynamicTracks { needed: usize, found: usize },
    #[error("ParseError: line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("MissingHeader: expected header `{0}`")]
    MissingHeader(&'static str),
    #[error("NonContiguousFrames: track {track} frames are not strictly ascending at line {line}")]
    NonContiguousFrames { track: u64, line: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("Io: {0}")]
    Io(String),
}

impl Error {
    /// The bare variant name, as reported on standard error by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyBlendSet => "EmptyBlendSet",
            Error::AllZeroWeights => "AllZeroWeights",
            Error::DisjointFrameRanges => "DisjointFrameRanges",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::NonPositiveRadius(_) => "NonPositiveRadius",
            Error::FrameOutOfRange { .. } => "FrameOutOfRange",
            Error::IntervalTooShort { .. } => "IntervalTooShort",
            Error::PartitionOutOfRange { .. } => "PartitionOutOfRange",
            Error::MissingAncestor(_) => "MissingAncestor",
            Error::NoVisibleObservations { .. } => "NoVisibleObservations",
            Error::NonFiniteComponent(_) => "NonFiniteComponent",
            Error::NonFiniteObjective(_) => "NonFiniteObjective",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::TooFewDynamicTracks { .. } => "TooFewDynamicTracks",
            Error::Parse { .. } => "ParseError",
            Error::MissingHeader(_) => "MissingHeader",
            Error::NonContiguousFrames { .. } => "NonContiguousFrames",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
