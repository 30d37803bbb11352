//! Wall-clock helpers: UTC calendar buckets and local broadcast time.

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use serde::{Deserialize, Serialize};

/// Milliseconds since the Unix epoch, UTC.
pub type UtcMillis = i64;

const MS_PER_DAY: i64 = 86_400_000;
const MS_PER_HOUR: i64 = 3_600_000;

/// Time-series bucket width. Weeks start on Monday.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketUnit {
    Day,
    Week,
    #[default]
    Month,
    Year,
}

impl BucketUnit {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "day" => Some(BucketUnit::Day),
            "week" => Some(BucketUnit::Week),
            "month" => Some(BucketUnit::Month),
            "year" => Some(BucketUnit::Year),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BucketUnit::Day => "day",
            BucketUnit::Week => "week",
            BucketUnit::Month => "month",
            BucketUnit::Year => "year",
        }
    }

    /// First day of the bucket containing `date`.
    pub fn bucket_start(self, date: NaiveDate) -> NaiveDate {
        match self {
            BucketUnit::Day => date,
            BucketUnit::Week => date - Duration::days(i64::from(date.weekday().num_days_from_monday())),
            BucketUnit::Month => date.with_day(1).expect("day 1 exists"),
            BucketUnit::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("Jan 1 exists"),
        }
    }

    /// First day of the bucket after the one starting at `start`.
    pub fn next_start(self, start: NaiveDate) -> NaiveDate {
        match self {
            BucketUnit::Day => start + Duration::days(1),
            BucketUnit::Week => start + Duration::days(7),
            BucketUnit::Month => {
                let (y, m) = if start.month() == 12 { (start.year() + 1, 1) } else { (start.year(), start.month() + 1) };
                NaiveDate::from_ymd_opt(y, m, 1).expect("valid month start")
            }
            BucketUnit::Year => NaiveDate::from_ymd_opt(start.year() + 1, 1, 1).expect("Jan 1 exists"),
        }
    }
}

pub fn utc_date(ms: UtcMillis) -> NaiveDate {
    date_time(ms).date()
}

pub fn date_time(ms: UtcMillis) -> NaiveDateTime {
    DateTime::from_timestamp_millis(ms).expect("timestamp in chrono range").naive_utc()
}

/// Midnight UTC of `date` in epoch milliseconds.
pub fn day_start_ms(date: NaiveDate) -> UtcMillis {
    date.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc().timestamp_millis()
}

/// Splits the absolute span `[start, end)` at bucket boundaries and calls
/// `visit(bucket_start, millis)` for every non-empty piece, in time order.
pub fn split_into_buckets(
    unit: BucketUnit,
    start: UtcMillis,
    end: UtcMillis,
    mut visit: impl FnMut(NaiveDate, u64),
) {
    let mut cursor = start;
    while cursor < end {
        let bucket = unit.bucket_start(utc_date(cursor));
        let boundary = day_start_ms(unit.next_start(bucket));
        let piece_end = end.min(boundary);
        visit(bucket, (piece_end - cursor) as u64);
        cursor = piece_end;
    }
}

/// How air times map to the local wall clock used by `hour` filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum LocalClock {
    /// Constant offset from UTC, in minutes.
    Fixed { offset_minutes: i32 },
    /// US Eastern time with the 2007 daylight-saving rules applied to every year.
    #[default]
    UsEastern,
}


impl LocalClock {
    pub fn offset_ms(self, at: UtcMillis) -> i64 {
        match self {
            LocalClock::Fixed { offset_minutes } => i64::from(offset_minutes) * 60_000,
            LocalClock::UsEastern => {
                let year = utc_date(at).year();
                // DST runs from 02:00 EST on the second Sunday of March (07:00 UTC)
                // to 02:00 EDT on the first Sunday of November (06:00 UTC).
                let start = day_start_ms(nth_weekday(year, 3, Weekday::Sun, 2)) + 7 * MS_PER_HOUR;
                let end = day_start_ms(nth_weekday(year, 11, Weekday::Sun, 1)) + 6 * MS_PER_HOUR;
                if (start..end).contains(&at) {
                    -4 * MS_PER_HOUR
                } else {
                    -5 * MS_PER_HOUR
                }
            }
        }
    }

    /// Local milliseconds since the local epoch (UTC epoch shifted by offset).
    pub fn local_ms(self, at: UtcMillis) -> i64 {
        at + self.offset_ms(at)
    }

    /// Local hour of day, 0..24.
    pub fn hour_of_day(self, at: UtcMillis) -> u32 {
        (self.local_ms(at).rem_euclid(MS_PER_DAY) / MS_PER_HOUR) as u32
    }
}

fn nth_weekday(year: i32, month: u32, weekday: Weekday, n: u8) -> NaiveDate {
    NaiveDate::from_weekday_of_month_opt(year, month, weekday, n).expect("weekday occurrence exists")
}

/// Length of one local hour, for iterating hour boundaries.
pub const HOUR_MS: i64 = MS_PER_HOUR;
