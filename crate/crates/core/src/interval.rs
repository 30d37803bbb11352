//! Half-open interval sets over integer-millisecond video time.
//!
//! Every set belongs to one video. Operations that combine sets require the
//! same video and always return canonical sets: sorted, with a strictly
//! positive gap between neighbours. Filters keep the intervals they are given
//! (and their payloads) untouched.

use alloc::vec::Vec;
use core::cmp::{max, min};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::IntervalError;

/// Milliseconds from the start of a video.
pub type TimePoint = u32;

/// A length of time in milliseconds.
pub type Millis = u32;

/// Index of a video inside an archive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VideoId(pub u32);

impl VideoId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VideoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "video#{}", self.0)
    }
}

/// Opaque reference to the record an interval was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Payload(pub u32);

/// `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: TimePoint,
    pub end: TimePoint,
    pub payload: Option<Payload>,
}

impl Interval {
    pub const fn new(start: TimePoint, end: TimePoint) -> Self {
        Interval { start, end, payload: None }
    }

    pub const fn with_payload(start: TimePoint, end: TimePoint, payload: Payload) -> Self {
        Interval { start, end, payload: Some(payload) }
    }

    pub const fn len(&self) -> Millis {
        self.end.saturating_sub(self.start)
    }

    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub const fn contains(&self, t: TimePoint) -> bool {
        self.start <= t && t < self.end
    }

    /// Pointset overlap. Touching intervals and empty intervals never overlap.
    pub const fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// True when one interval ends at or before the other starts and the gap
    /// between them is strictly less than `max_gap`.
    pub const fn before_or_after(&self, other: &Interval, max_gap: Millis) -> bool {
        if self.end <= other.start {
            other.start - self.end < max_gap
        } else if other.end <= self.start {
            self.start - other.end < max_gap
        } else {
            false
        }
    }

    fn span(&self, other: &Interval) -> Interval {
        Interval::new(min(self.start, other.start), max(self.end, other.end))
    }

    fn intersection(&self, other: &Interval) -> Interval {
        Interval::new(max(self.start, other.start), min(self.end, other.end))
    }

    fn sort_key(&self) -> (TimePoint, TimePoint) {
        (self.start, self.end)
    }
}

/// Temporal predicate for `filter_against` and `join`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    Overlaps,
    /// One interval ends at or before the other starts, with a gap `< max_gap`.
    BeforeOrAfter { max_gap: Millis },
}

impl Predicate {
    fn holds(self, x: &Interval, y: &Interval) -> bool {
        match self {
            Predicate::Overlaps => x.overlaps(y),
            Predicate::BeforeOrAfter { max_gap } => x.before_or_after(y, max_gap),
        }
    }

    /// How far beyond an interval a partner may lie and still satisfy the predicate.
    fn reach(self) -> Millis {
        match self {
            Predicate::Overlaps => 0,
            Predicate::BeforeOrAfter { max_gap } => max_gap,
        }
    }
}

/// How `join` combines a matching pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Merge {
    Intersection,
    Span,
}

/// Sorted intervals belonging to one video.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSet {
    video: VideoId,
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty(video: VideoId) -> Self {
        IntervalSet { video, intervals: Vec::new() }
    }

    /// Sorts `intervals` by `(start, end)`. Rejects any interval with `end < start`.
    pub fn new(video: VideoId, mut intervals: Vec<Interval>) -> Result<Self, IntervalError> {
        if let Some(bad) = intervals.iter().find(|iv| iv.end < iv.start) {
            return Err(IntervalError::Malformed { start: bad.start, end: bad.end });
        }
        if !is_sorted(&intervals) {
            intervals.sort_by_key(Interval::sort_key);
        }
        Ok(IntervalSet { video, intervals })
    }

    /// Builds a set and canonicalizes it in one step.
    pub fn canonical(video: VideoId, intervals: Vec<Interval>) -> Result<Self, IntervalError> {
        Ok(Self::new(video, intervals)?.canonicalize())
    }

    /// `[start, end)` as a one-element canonical set (empty when `start >= end`).
    pub fn span(video: VideoId, start: TimePoint, end: TimePoint) -> Self {
        let intervals = if start < end { alloc::vec![Interval::new(start, end)] } else { Vec::new() };
        IntervalSet { video, intervals }
    }

    /// Caller guarantees `intervals` is sorted and well formed.
    pub(crate) fn from_sorted_unchecked(video: VideoId, intervals: Vec<Interval>) -> Self {
        debug_assert!(is_sorted(&intervals));
        debug_assert!(intervals.iter().all(|iv| iv.start <= iv.end));
        IntervalSet { video, intervals }
    }

    pub fn video(&self) -> VideoId {
        self.video
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn into_intervals(self) -> Vec<Interval> {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Interval> {
        self.intervals.iter()
    }

    /// Sorted, no empty intervals, every gap between neighbours strictly positive.
    pub fn is_canonical(&self) -> bool {
        self.intervals.iter().all(|iv| iv.start < iv.end && iv.payload.is_none())
            && self.intervals.windows(2).all(|w| w[0].end < w[1].start)
    }

    /// Same pointset, merged and payload-free.
    pub fn canonicalize(&self) -> IntervalSet {
        if self.is_canonical() {
            return self.clone();
        }
        IntervalSet { video: self.video, intervals: merge_sorted(&self.intervals, 0) }
    }

    /// Whether `t` lies inside any interval.
    pub fn contains(&self, t: TimePoint) -> bool {
        if self.is_disjoint() {
            self.contains_disjoint(t)
        } else {
            self.intervals.iter().any(|iv| iv.contains(t))
        }
    }

    /// Whether any interval overlaps `probe`.
    pub fn overlaps(&self, probe: &Interval) -> bool {
        if self.is_disjoint() {
            self.overlaps_disjoint(probe)
        } else {
            self.intervals.iter().any(|iv| iv.overlaps(probe))
        }
    }

    /// `contains` in O(log n); the set must be pairwise disjoint (e.g. canonical).
    pub(crate) fn contains_disjoint(&self, t: TimePoint) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.end <= t);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(t))
    }

    /// `overlaps` in O(log n); the set must be pairwise disjoint (e.g. canonical).
    pub(crate) fn overlaps_disjoint(&self, probe: &Interval) -> bool {
        if probe.is_empty() {
            return false;
        }
        let idx = self.intervals.partition_point(|iv| iv.end <= probe.start);
        self.intervals.get(idx).is_some_and(|iv| iv.overlaps(probe))
    }

    // Binary search by end is valid once intervals are pairwise disjoint.
    fn is_disjoint(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0].end <= w[1].start)
    }

    fn check_same_video(&self, other: &IntervalSet) -> Result<(), IntervalError> {
        if self.video == other.video {
            Ok(())
        } else {
            Err(IntervalError::VideoMismatch { left: self.video, right: other.video })
        }
    }

    pub fn union(&self, other: &IntervalSet) -> Result<IntervalSet, IntervalError> {
        self.check_same_video(other)?;
        let mut all = Vec::with_capacity(self.len() + other.len());
        merge_by_start(&self.intervals, &other.intervals, &mut all);
        Ok(IntervalSet { video: self.video, intervals: merge_sorted(&all, 0) })
    }

    pub fn intersect(&self, other: &IntervalSet) -> Result<IntervalSet, IntervalError> {
        self.check_same_video(other)?;
        let a = self.canonicalize();
        let b = other.canonicalize();
        let (a, b) = (a.intervals(), b.intervals());
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let cut = a[i].intersection(&b[j]);
            if cut.start < cut.end {
                out.push(cut);
            }
            if a[i].end <= b[j].end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(IntervalSet { video: self.video, intervals: out })
    }

    pub fn minus(&self, other: &IntervalSet) -> Result<IntervalSet, IntervalError> {
        self.check_same_video(other)?;
        let a = self.canonicalize();
        let b = other.canonicalize();
        let b = b.intervals();
        let mut out = Vec::new();
        let mut j = 0;
        for iv in a.intervals() {
            let mut cursor = iv.start;
            while j < b.len() && b[j].end <= cursor {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k].start < iv.end {
                if b[k].start > cursor {
                    out.push(Interval::new(cursor, b[k].start));
                }
                cursor = max(cursor, b[k].end);
                k += 1;
            }
            if cursor < iv.end {
                out.push(Interval::new(cursor, iv.end));
            }
        }
        Ok(IntervalSet { video: self.video, intervals: out })
    }

    /// Merges intervals whose gap is strictly less than `max_gap` into their
    /// span, to a fixpoint. Overlapping and touching intervals always merge.
    pub fn coalesce(&self, max_gap: Millis) -> IntervalSet {
        IntervalSet { video: self.video, intervals: merge_sorted(&self.intervals, max_gap) }
    }

    /// Keeps intervals with `min < len` (if given) and `len < max` (if given).
    pub fn filter_length(&self, min_len: Option<Millis>, max_len: Option<Millis>) -> IntervalSet {
        self.filter(|iv| {
            min_len.is_none_or(|m| iv.len() > m) && max_len.is_none_or(|m| iv.len() < m)
        })
    }

    /// Keeps the intervals matching `keep`, payloads included.
    pub fn filter(&self, mut keep: impl FnMut(&Interval) -> bool) -> IntervalSet {
        IntervalSet {
            video: self.video,
            intervals: self.intervals.iter().filter(|iv| keep(iv)).copied().collect(),
        }
    }

    /// Keeps every interval of `self` that satisfies `predicate` with at least
    /// one interval of `other`.
    pub fn filter_against(
        &self,
        other: &IntervalSet,
        predicate: Predicate,
    ) -> Result<IntervalSet, IntervalError> {
        self.check_same_video(other)?;
        let probe = PartnerIndex::new(&other.intervals);
        let reach = predicate.reach();
        Ok(self.filter(|x| probe.candidates(x, reach).any(|y| predicate.holds(x, y))))
    }

    /// Emits `merge(x, y)` for every pair `x ∈ self`, `y ∈ other` satisfying
    /// `predicate`, then canonicalizes.
    pub fn join(
        &self,
        other: &IntervalSet,
        predicate: Predicate,
        merge: Merge,
    ) -> Result<IntervalSet, IntervalError> {
        self.check_same_video(other)?;
        if matches!((predicate, merge), (Predicate::BeforeOrAfter { .. }, Merge::Intersection)) {
            return Err(IntervalError::InvalidJoin);
        }
        let probe = PartnerIndex::new(&other.intervals);
        let reach = predicate.reach();
        let mut out = Vec::new();
        for x in &self.intervals {
            for y in probe.candidates(x, reach) {
                if predicate.holds(x, y) {
                    out.push(match merge {
                        Merge::Span => x.span(y),
                        Merge::Intersection => x.intersection(y),
                    });
                }
            }
        }
        out.sort_by_key(Interval::sort_key);
        Ok(IntervalSet { video: self.video, intervals: merge_sorted(&out, 0) })
    }

    /// Total measure of the pointset; overlaps count once.
    pub fn duration_sum(&self) -> u64 {
        let mut total = 0u64;
        let mut cover_end: Option<TimePoint> = None;
        let mut cover_start = 0;
        for iv in self.intervals.iter().filter(|iv| !iv.is_empty()) {
            match cover_end {
                Some(end) if iv.start <= end => cover_end = Some(max(end, iv.end)),
                Some(end) => {
                    total += u64::from(end - cover_start);
                    cover_start = iv.start;
                    cover_end = Some(iv.end);
                }
                None => {
                    cover_start = iv.start;
                    cover_end = Some(iv.end);
                }
            }
        }
        if let Some(end) = cover_end {
            total += u64::from(end - cover_start);
        }
        total
    }

    /// Restricts the set to `[0, end)`, keeping payloads on surviving pieces.
    pub fn clip_to(&self, end: TimePoint) -> IntervalSet {
        let intervals = self
            .intervals
            .iter()
            .filter(|iv| iv.start < end)
            .map(|iv| Interval { end: min(iv.end, end), ..*iv })
            .collect();
        IntervalSet { video: self.video, intervals }
    }
}

impl<'a> IntoIterator for &'a IntervalSet {
    type Item = &'a Interval;
    type IntoIter = core::slice::Iter<'a, Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.intervals.iter()
    }
}

fn is_sorted(intervals: &[Interval]) -> bool {
    intervals.windows(2).all(|w| w[0].sort_key() <= w[1].sort_key())
}

fn merge_by_start(a: &[Interval], b: &[Interval], out: &mut Vec<Interval>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].sort_key() <= b[j].sort_key() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Single left-to-right pass over start-sorted intervals. Two spans merge when
/// they overlap, touch, or their gap is `< max_gap`. Empty intervals vanish.
fn merge_sorted(sorted: &[Interval], max_gap: Millis) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
    for iv in sorted.iter().filter(|iv| !iv.is_empty()) {
        match out.last_mut() {
            Some(last) if iv.start <= last.end || iv.start - last.end < max_gap => {
                last.end = max(last.end, iv.end);
            }
            _ => out.push(Interval::new(iv.start, iv.end)),
        }
    }
    out
}

/// Start-sorted view of a set supporting "which intervals could be within
/// `reach` of x" queries without requiring canonical input.
struct PartnerIndex<'a> {
    intervals: &'a [Interval],
    longest: Millis,
}

impl<'a> PartnerIndex<'a> {
    fn new(intervals: &'a [Interval]) -> Self {
        let longest = intervals.iter().map(Interval::len).max().unwrap_or(0);
        PartnerIndex { intervals, longest }
    }

    fn candidates(&self, x: &Interval, reach: Millis) -> impl Iterator<Item = &'a Interval> + '_ {
        // y can only relate to x if y.start < x.end + reach and
        // y.end > x.start - reach, hence y.start > x.start - reach - longest.
        let hi = u64::from(x.end) + u64::from(reach);
        let lo = u64::from(x.start).saturating_sub(u64::from(reach) + u64::from(self.longest));
        let first = self.intervals.partition_point(|y| u64::from(y.start) < lo);
        self.intervals[first..].iter().take_while(move |y| u64::from(y.start) <= hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const V: VideoId = VideoId(0);

    fn set(spans: &[(u32, u32)]) -> IntervalSet {
        IntervalSet::new(V, spans.iter().map(|&(s, e)| Interval::new(s, e)).collect()).unwrap()
    }

    fn spans(s: &IntervalSet) -> Vec<(u32, u32)> {
        s.iter().map(|iv| (iv.start, iv.end)).collect()
    }

    #[test]
    fn canonicalize_examples() {
        assert!(set(&[]).canonicalize().is_empty());
        assert_eq!(spans(&set(&[(0, 5), (3, 8)]).canonicalize()), vec![(0, 8)]);
        assert_eq!(spans(&set(&[(2, 3), (0, 1), (1, 2)]).canonicalize()), vec![(0, 3)]);
    }

    #[test]
    fn malformed_interval_rejected() {
        let err = IntervalSet::new(V, vec![Interval::new(5, 4)]).unwrap_err();
        assert_eq!(err, IntervalError::Malformed { start: 5, end: 4 });
    }

    #[test]
    fn canonicalize_drops_payloads_of_merged() {
        let s = IntervalSet::new(
            V,
            vec![Interval::with_payload(0, 5, Payload(1)), Interval::with_payload(3, 8, Payload(2))],
        )
        .unwrap();
        assert_eq!(s.canonicalize().intervals(), &[Interval::new(0, 8)]);
    }

    #[test]
    fn union_examples() {
        assert_eq!(spans(&set(&[(0, 1)]).union(&set(&[])).unwrap()), vec![(0, 1)]);
        assert_eq!(spans(&set(&[(0, 2)]).union(&set(&[(1, 3)])).unwrap()), vec![(0, 3)]);
        assert_eq!(spans(&set(&[(0, 1)]).union(&set(&[(2, 3)])).unwrap()), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(spans(&set(&[(0, 10)]).intersect(&set(&[(3, 4)])).unwrap()), vec![(3, 4)]);
        assert!(set(&[(0, 2)]).intersect(&set(&[(2, 4)])).unwrap().is_empty());
    }

    #[test]
    fn minus_examples() {
        assert_eq!(spans(&set(&[(0, 10)]).minus(&set(&[(3, 4)])).unwrap()), vec![(0, 3), (4, 10)]);
        assert_eq!(spans(&set(&[(0, 10)]).minus(&set(&[])).unwrap()), vec![(0, 10)]);
    }

    #[test]
    fn mismatched_video_is_an_error() {
        let other = IntervalSet::span(VideoId(7), 0, 1);
        assert!(matches!(set(&[(0, 1)]).union(&other), Err(IntervalError::VideoMismatch { .. })));
        assert!(set(&[(0, 1)]).intersect(&other).is_err());
        assert!(set(&[(0, 1)]).minus(&other).is_err());
        assert!(set(&[(0, 1)]).filter_against(&other, Predicate::Overlaps).is_err());
        assert!(set(&[(0, 1)]).join(&other, Predicate::Overlaps, Merge::Span).is_err());
    }

    #[test]
    fn coalesce_gap_is_strict() {
        assert_eq!(spans(&set(&[(0, 1000), (1050, 2000)]).coalesce(100)), vec![(0, 2000)]);
        assert_eq!(spans(&set(&[(0, 1000), (1100, 2000)]).coalesce(100)), vec![(0, 1000), (1100, 2000)]);
    }

    #[test]
    fn filter_length_is_strict() {
        assert_eq!(spans(&set(&[(0, 400), (0, 600)]).filter_length(Some(500), None)), vec![(0, 600)]);
        assert_eq!(spans(&set(&[(0, 400)]).filter_length(None, Some(500))), vec![(0, 400)]);
        assert!(set(&[(0, 500)]).filter_length(Some(500), None).is_empty());
    }

    #[test]
    fn filter_against_examples() {
        let a = set(&[(0, 2), (5, 6)]);
        assert_eq!(spans(&a.filter_against(&set(&[(1, 3)]), Predicate::Overlaps).unwrap()), vec![(0, 2)]);
        assert!(a.filter_against(&set(&[]), Predicate::Overlaps).unwrap().is_empty());
    }

    #[test]
    fn filter_against_keeps_payloads() {
        let a = IntervalSet::new(V, vec![Interval::with_payload(0, 2, Payload(9))]).unwrap();
        let kept = a.filter_against(&set(&[(1, 3)]), Predicate::Overlaps).unwrap();
        assert_eq!(kept.intervals()[0].payload, Some(Payload(9)));
    }

    #[test]
    fn join_examples() {
        let j = set(&[(0, 5)]).join(&set(&[(3, 8)]), Predicate::Overlaps, Merge::Intersection).unwrap();
        assert_eq!(spans(&j), vec![(3, 5)]);
        let j = set(&[(0, 5)])
            .join(&set(&[(6, 8)]), Predicate::BeforeOrAfter { max_gap: 2000 }, Merge::Span)
            .unwrap();
        assert_eq!(spans(&j), vec![(0, 8)]);
    }

    #[test]
    fn join_rejects_intersection_with_before_or_after() {
        let r = set(&[(0, 5)]).join(&set(&[(6, 8)]), Predicate::BeforeOrAfter { max_gap: 10 }, Merge::Intersection);
        assert_eq!(r.unwrap_err(), IntervalError::InvalidJoin);
    }

    #[test]
    fn join_span_uses_raw_intervals() {
        // Canonicalizing the left side first would give [0,5); pairs are raw.
        let a = set(&[(0, 2), (2, 4)]);
        let j = a.join(&set(&[(3, 5)]), Predicate::Overlaps, Merge::Span).unwrap();
        assert_eq!(spans(&j), vec![(2, 5)]);
    }

    #[test]
    fn duration_sum_examples() {
        assert_eq!(set(&[]).duration_sum(), 0);
        assert_eq!(set(&[(0, 2000), (1000, 3000)]).duration_sum(), 3000);
        assert_eq!(set(&[(0, 1000), (5000, 6000)]).duration_sum(), 2000);
    }

    #[test]
    fn contains_and_overlaps_on_raw_sets() {
        let raw = set(&[(0, 100), (10, 20)]);
        assert!(raw.contains(50));
        assert!(raw.overlaps(&Interval::new(90, 95)));
        let canon = set(&[(0, 10), (20, 30)]);
        assert!(!canon.contains(10));
        assert!(canon.contains(20));
        assert!(!canon.overlaps(&Interval::new(10, 20)));
    }
}
