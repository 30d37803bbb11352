//! Time-series aggregation and clip listing over evaluated sets.

use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use super::eval::snippet;
use crate::archive::Archive;
use crate::error::QueryError;
use crate::interval::{Interval, IntervalSet, Millis, VideoId};
use crate::time::{split_into_buckets, BucketUnit, UtcMillis};

pub const MAX_PAGE_SIZE: usize = 1000;
pub const SNIPPET_PAD: Millis = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    /// First day of the bucket (UTC).
    pub bucket: NaiveDate,
    pub millis: u64,
    /// News-content time in the bucket, present when normalized.
    pub denominator_millis: Option<u64>,
}

impl SeriesPoint {
    pub fn seconds(&self) -> f64 {
        self.millis as f64 / 1000.0
    }

    /// The normalized value, or raw seconds when there is no denominator.
    pub fn value(&self) -> f64 {
        match self.denominator_millis {
            Some(0) => 0.0,
            Some(d) => self.millis as f64 / d as f64,
            None => self.seconds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub unit: BucketUnit,
    pub normalized: bool,
    pub points: Vec<SeriesPoint>,
}

impl TimeSeries {
    pub fn total_millis(&self) -> u64 {
        self.points.iter().map(|p| p.millis).sum()
    }
}

fn accumulate(
    archive: &Archive,
    sets: &[IntervalSet],
    unit: BucketUnit,
    into: &mut HashMap<NaiveDate, u64>,
) {
    for set in sets {
        let air = archive.video(set.video()).expect("video exists").air_utc;
        for iv in set.iter() {
            let start = air + UtcMillis::from(iv.start);
            let end = air + UtcMillis::from(iv.end);
            split_into_buckets(unit, start, end, |bucket, ms| *into.entry(bucket).or_default() += ms);
        }
    }
}

/// Sums matched time per calendar bucket. Without normalization only buckets
/// with matched time appear; with it, every bucket with news content in the
/// evaluated videos appears alongside its news-content total.
pub fn aggregate(archive: &Archive, sets: &[IntervalSet], unit: BucketUnit, normalize: bool) -> TimeSeries {
    let mut numer = HashMap::new();
    accumulate(archive, sets, unit, &mut numer);
    let mut denom = HashMap::new();
    if normalize {
        let news: Vec<IntervalSet> = sets
            .iter()
            .filter_map(|s| archive.news_content(s.video()).cloned())
            .collect();
        accumulate(archive, &news, unit, &mut denom);
    }
    let mut buckets: Vec<NaiveDate> = numer.keys().chain(denom.keys()).copied().collect();
    buckets.sort_unstable();
    buckets.dedup();
    let points = buckets
        .into_iter()
        .map(|bucket| SeriesPoint {
            bucket,
            millis: numer.get(&bucket).copied().unwrap_or(0),
            denominator_millis: normalize.then(|| denom.get(&bucket).copied().unwrap_or(0)),
        })
        .filter(|p| p.millis > 0 || p.denominator_millis.is_some())
        .collect();
    TimeSeries { unit, normalized: normalize, points }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clip {
    pub video: VideoId,
    pub name: String,
    pub channel: String,
    pub show: String,
    pub air_utc: UtcMillis,
    pub interval: Interval,
    pub snippet: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipPage {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub clips: Vec<Clip>,
}

/// One page of matching intervals ordered by air time, then position.
/// Pages past the end are empty.
pub fn clips(archive: &Archive, sets: &[IntervalSet], page: usize, page_size: usize) -> Result<ClipPage, QueryError> {
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(QueryError::PageSize(page_size));
    }
    let mut all: Vec<(UtcMillis, VideoId, Interval)> = Vec::new();
    for set in sets {
        let air = archive.video(set.video()).expect("video exists").air_utc;
        all.extend(set.iter().map(|iv| (air, set.video(), *iv)));
    }
    all.sort_unstable_by_key(|&(air, video, iv)| (air, video, iv.start));
    let total = all.len();
    let clips = all
        .into_iter()
        .skip(page.saturating_mul(page_size))
        .take(page_size)
        .map(|(air_utc, video, interval)| {
            let meta = archive.video(video).expect("video exists");
            Clip {
                video,
                name: meta.name.clone(),
                channel: meta.channel.clone(),
                show: meta.show.clone(),
                air_utc,
                interval,
                snippet: snippet(archive, video, interval, SNIPPET_PAD),
            }
        })
        .collect();
    Ok(ClipPage { total, page, page_size, clips })
}
