//! Event detectors expressed as interval-set pipelines.
//!
//! The commercial detector relies on three caption/visual cues: black frames
//! bracket commercial breaks, commercials lack `>>` speaker-change markers,
//! and commercial captions are mixed/lower case or missing entirely.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::archive::{Archive, PersonId};
use crate::error::DetectError;
use crate::interval::{Interval, IntervalSet, Merge, Millis, Predicate, TimePoint, VideoId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommercialParams {
    /// Mean frame intensity below which a frame counts as black.
    pub black_threshold: f32,
    pub black_gap: Millis,
    pub black_min_len: Millis,
    pub seg_min_len: Millis,
    pub lowercase_gap: Millis,
    pub nocaption_min: Millis,
    pub nocaption_max: Millis,
    pub final_gap: Millis,
    pub final_max_len: Millis,
}

impl Default for CommercialParams {
    fn default() -> Self {
        CommercialParams {
            black_threshold: 0.01,
            black_gap: 100,
            black_min_len: 500,
            seg_min_len: 10_000,
            lowercase_gap: 5_000,
            nocaption_min: 30_000,
            nocaption_max: 270_000,
            final_gap: 45_000,
            final_max_len: 300_000,
        }
    }
}

impl CommercialParams {
    pub fn validate(&self) -> Result<(), DetectError> {
        let all_positive = self.black_threshold > 0.0
            && [
                self.black_gap,
                self.black_min_len,
                self.seg_min_len,
                self.lowercase_gap,
                self.nocaption_min,
                self.nocaption_max,
                self.final_gap,
                self.final_max_len,
            ]
            .iter()
            .all(|&v| v > 0);
        if !all_positive {
            return Err(DetectError::Params("commercial parameters must be positive"));
        }
        if self.nocaption_min >= self.nocaption_max {
            return Err(DetectError::Params("nocaption_min must be below nocaption_max"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterviewParams {
    pub coalesce_gap: Millis,
    pub adjacency_gap: Millis,
    pub min_duration: Millis,
}

impl Default for InterviewParams {
    fn default() -> Self {
        InterviewParams { coalesce_gap: 30_000, adjacency_gap: 60_000, min_duration: 240_000 }
    }
}

impl InterviewParams {
    pub fn validate(&self) -> Result<(), DetectError> {
        if self.coalesce_gap == 0 || self.adjacency_gap == 0 || self.min_duration == 0 {
            return Err(DetectError::Params("interview parameters must be positive"));
        }
        Ok(())
    }
}

/// The caption features the commercial detector looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaptionSpan {
    pub t0: TimePoint,
    pub t1: TimePoint,
    pub has_arrows: bool,
    pub has_lowercase: bool,
}

impl CaptionSpan {
    pub fn from_text(text: &str, t0: TimePoint, t1: TimePoint) -> Self {
        CaptionSpan { t0, t1, has_arrows: text.contains(">>"), has_lowercase: text.chars().any(char::is_lowercase) }
    }

    /// Token extent; zero-length alignments occupy one millisecond.
    pub fn extent(&self) -> Interval {
        token_extent(self.t0, self.t1)
    }
}

pub(crate) fn token_extent(t0: TimePoint, t1: TimePoint) -> Interval {
    Interval::new(t0, t1.max(t0.saturating_add(1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LuminanceSample {
    pub t: TimePoint,
    pub value: f32,
}

/// Result of running the commercial detector on one video.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommercialOutcome {
    /// No captions: the cues the detector needs are missing.
    Unknown,
    Detected(IntervalSet),
}

impl CommercialOutcome {
    pub fn mask(&self) -> Option<&IntervalSet> {
        match self {
            CommercialOutcome::Unknown => None,
            CommercialOutcome::Detected(set) => Some(set),
        }
    }
}

/// Runs of black frames: each dark sample covers the time until the next
/// sample; runs are coalesced with gap `< black_gap` and kept when longer
/// than `black_min_len`.
pub fn detect_black_frames(
    video: VideoId,
    duration: Millis,
    samples: &[LuminanceSample],
    params: &CommercialParams,
) -> IntervalSet {
    let mut dark = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if s.value >= params.black_threshold || s.t >= duration {
            continue;
        }
        let end = match samples.get(i + 1) {
            Some(next) => next.t,
            None if i > 0 => s.t + (s.t - samples[i - 1].t),
            None => s.t,
        };
        dark.push(Interval::new(s.t, end.min(duration)));
    }
    IntervalSet::from_sorted_unchecked(video, dark)
        .coalesce(params.black_gap)
        .filter_length(Some(params.black_min_len), None)
}

/// Commercial segments of one video.
pub fn detect_commercials(
    video: VideoId,
    duration: Millis,
    captions: &[CaptionSpan],
    luminance: &[LuminanceSample],
    params: &CommercialParams,
) -> Result<CommercialOutcome, DetectError> {
    params.validate()?;
    if captions.is_empty() {
        return Ok(CommercialOutcome::Unknown);
    }
    let entire = IntervalSet::span(video, 0, duration);
    let words = caption_set(video, duration, captions.iter());
    let arrows = caption_set(video, duration, captions.iter().filter(|c| c.has_arrows));

    let black = detect_black_frames(video, duration, luminance, params);
    let candidates = entire.minus(&black)?;
    let non_commercial = candidates.filter_against(&arrows, Predicate::Overlaps)?;
    let commercial_segs = entire.minus(&non_commercial.union(&black)?)?;
    let commercials = commercial_segs.coalesce(0).filter_length(Some(params.seg_min_len), None);

    let lower_case = caption_set(video, duration, captions.iter().filter(|c| c.has_lowercase))
        .coalesce(params.lowercase_gap);
    let no_captions = entire.minus(&words)?.filter_length(Some(params.nocaption_min), Some(params.nocaption_max));

    let detected = commercials
        .union(&lower_case)?
        .union(&no_captions)?
        .coalesce(params.final_gap)
        .filter_length(None, Some(params.final_max_len));
    Ok(CommercialOutcome::Detected(detected))
}

fn caption_set<'a>(video: VideoId, duration: Millis, spans: impl Iterator<Item = &'a CaptionSpan>) -> IntervalSet {
    let mut ivs: Vec<Interval> = spans.map(CaptionSpan::extent).filter(|iv| iv.start < duration).collect();
    ivs.sort_unstable_by_key(|iv| (iv.start, iv.end));
    IntervalSet::from_sorted_unchecked(video, ivs).clip_to(duration).canonicalize()
}

/// Interview segments given the guest's and the hosts' face intervals.
pub fn interview_segments(
    guest_faces: &IntervalSet,
    host_faces: &IntervalSet,
    params: &InterviewParams,
) -> Result<IntervalSet, DetectError> {
    params.validate()?;
    let guest = guest_faces.coalesce(params.coalesce_gap);
    let host = host_faces.coalesce(params.coalesce_gap);
    let both = guest.join(&host, Predicate::Overlaps, Merge::Intersection)?;
    let guest_alone = guest.minus(&both)?;
    let interviews = both
        .join(&guest_alone, Predicate::BeforeOrAfter { max_gap: params.adjacency_gap }, Merge::Span)?
        .coalesce(0)
        .filter(|iv| iv.len() >= params.min_duration);
    Ok(interviews)
}

/// Interviews of `guest` by any of `hosts` in one archived video.
pub fn detect_interviews(
    archive: &Archive,
    video: VideoId,
    guest: &str,
    hosts: &[&str],
    params: &InterviewParams,
) -> Result<IntervalSet, DetectError> {
    let guest_id = archive.person_id(guest).ok_or_else(|| DetectError::UnknownGuest(guest.into()))?;
    let mut host_ids: Vec<PersonId> = Vec::with_capacity(hosts.len());
    for &h in hosts {
        // Hosts without labels simply never appear.
        if let Some(id) = archive.person_id(h) {
            if id == guest_id {
                return Err(DetectError::GuestIsHost(guest.into()));
            }
            host_ids.push(id);
        }
    }
    let guest_faces = archive.identity_set(video, guest_id);
    let mut host_faces = IntervalSet::empty(video);
    for id in host_ids {
        host_faces = host_faces.union(&archive.identity_set(video, id))?;
    }
    interview_segments(&guest_faces, &host_faces, params)
}

/// Frame-to-frame histogram difference at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramDiff {
    pub t: TimePoint,
    pub diff: f32,
}

/// Shots between cuts, where a cut is a difference strictly above
/// `threshold`. The shots tile `[0, duration)`, so the result is sorted but
/// intentionally not canonical (neighbouring shots touch).
pub fn detect_shots(video: VideoId, duration: Millis, diffs: &[HistogramDiff], threshold: f32) -> IntervalSet {
    if diffs.is_empty() || duration == 0 {
        return IntervalSet::empty(video);
    }
    let mut shots = Vec::new();
    let mut start = 0;
    for d in diffs.iter().filter(|d| d.diff > threshold && d.t > 0 && d.t < duration) {
        if d.t > start {
            shots.push(Interval::new(start, d.t));
            start = d.t;
        }
    }
    shots.push(Interval::new(start, duration));
    IntervalSet::from_sorted_unchecked(video, shots)
}

/// Mean length of the intervals in `shots`, in milliseconds.
pub fn mean_shot_length(shots: &IntervalSet) -> Option<f64> {
    if shots.is_empty() {
        return None;
    }
    let total: u64 = shots.iter().map(|s| u64::from(s.len())).sum();
    Some(total as f64 / shots.len() as f64)
}
