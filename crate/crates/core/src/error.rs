use alloc::string::String;

use thiserror::Error;

use crate::interval::{TimePoint, VideoId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("malformed interval [{start}, {end}): end precedes start")]
    Malformed { start: TimePoint, end: TimePoint },
    #[error("interval sets belong to different videos ({left} vs {right})")]
    VideoMismatch { left: VideoId, right: VideoId },
    #[error("intersection merge is undefined for the before-or-after predicate")]
    InvalidJoin,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArchiveError {
    #[error("duplicate video id {0:?}")]
    DuplicateVideo(String),
    #[error("duplicate airing ({channel}, {show}, {air_utc_ms})")]
    DuplicateAiring { channel: String, show: String, air_utc_ms: i64 },
    #[error("video {0:?} has zero duration")]
    ZeroDuration(String),
    #[error("unknown video {0:?}")]
    UnknownVideo(String),
    #[error("duplicate person {0:?}")]
    DuplicatePerson(String),
    #[error("unknown person {0:?}")]
    UnknownPerson(String),
    #[error("face sample at {t} ms lies outside video {video} (duration {duration} ms)")]
    FaceOutsideVideo { video: VideoId, t: TimePoint, duration: u32 },
    #[error("invalid bounding box {0:?}")]
    InvalidBox([f32; 4]),
    #[error("score {0} outside [0, 1]")]
    InvalidScore(f32),
    #[error("token seq {seq} in {video} does not increase (previous {previous})")]
    NonMonotoneSeq { video: VideoId, seq: u32, previous: u32 },
    #[error("token in {video} ends before it starts ({t0} > {t1})")]
    TokenReversed { video: VideoId, t0: TimePoint, t1: TimePoint },
    #[error("luminance value {0} outside [0, 1]")]
    InvalidLuminance(f32),
    #[error("luminance samples in {video} are not time-ordered at {t} ms")]
    LuminanceOrder { video: VideoId, t: TimePoint },
    #[error("descriptor index {index} out of range ({count} stored)")]
    DanglingDescriptor { index: u32, count: usize },
    #[error("descriptor store holds {0} floats, not a multiple of 128")]
    DescriptorShape(usize),
    #[error("descriptor {0} has a non-finite component")]
    NonFiniteDescriptor(usize),
    #[error("invalid archive configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("guest {0:?} is not a known person")]
    UnknownGuest(String),
    #[error("guest {0:?} is also listed as a host")]
    GuestIsHost(String),
    #[error("invalid detector parameters: {0}")]
    Params(&'static str),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k = {k} must lie in 1..={available}")]
    InvalidK { k: usize, available: usize },
    #[error("exemplar set is empty")]
    NoExemplars,
    #[error("threshold must be positive")]
    NonPositiveThreshold,
    #[error("face {0} has no descriptor")]
    MissingDescriptor(usize),
    #[error("confusion matrix must be square, non-empty and have a non-zero row")]
    InvalidMatrix,
    #[error("precision for class {0} is undefined but it has a nonzero count")]
    UndefinedPrecision(usize),
    #[error("class count mismatch: {counts} counts for {classes} classes")]
    ClassMismatch { counts: usize, classes: usize },
    #[error("sample size must be at least 1 and successes at most n")]
    InvalidProportion,
    #[error("confidence must lie strictly between 0 and 1")]
    InvalidConfidence,
}

/// Query-language syntax and validation errors. `offset` is a byte offset
/// into the query string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of query")]
    UnexpectedEnd,
    #[error("unexpected input {0:?}")]
    Unexpected(String),
    #[error("unterminated quoted value")]
    UnterminatedValue,
    #[error("unknown filter key {0:?}")]
    UnknownKey(String),
    #[error("malformed value for {key}: {reason}")]
    BadValue { key: &'static str, reason: &'static str },
    #[error("textwindow requires a text filter in the same AND group")]
    OrphanTextWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("page size {0} is outside 1..=1000")]
    PageSize(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("unknown person {0:?}")]
    UnknownPerson(String),
    #[error("invalid parameter: {0}")]
    Params(&'static str),
    #[error("mention rule target is empty")]
    EmptyTarget,
    #[error("alias {0:?} is assigned to more than one country")]
    DuplicateAlias(String),
}
