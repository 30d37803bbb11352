//! Request handling shared by the CLI and the HTTP API, so both paths
//! produce the same bytes for the same query.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use newsframe_core::query::{self, Clip, TimeSeries};
use newsframe_core::time::{utc_date, BucketUnit};
use newsframe_core::{Archive, ParseError, QueryError, VideoMeta};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formats::format_utc;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLine {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
}

/// Inclusive range of UTC air dates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    #[serde(default)]
    pub from: Option<NaiveDate>,
    #[serde(default)]
    pub to: Option<NaiveDate>,
}

impl DateRange {
    pub fn contains(&self, meta: &VideoMeta) -> bool {
        let day = utc_date(meta.air_utc);
        self.from.is_none_or(|f| day >= f) && self.to.is_none_or(|t| day <= t)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub queries: Vec<QueryLine>,
    #[serde(default)]
    pub bucket: Option<BucketUnit>,
    #[serde(default)]
    pub normalize: Option<bool>,
    #[serde(default)]
    pub date_range: Option<DateRange>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Defaults {
    pub bucket: BucketUnit,
    pub normalize: bool,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { bucket: BucketUnit::Month, normalize: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointOut {
    pub bucket: NaiveDate,
    pub seconds: f64,
    /// Seconds, or the normalized share when a denominator is present.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOut {
    pub query: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    pub total_seconds: f64,
    pub points: Vec<PointOut>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub bucket: BucketUnit,
    pub normalize: bool,
    pub series: Vec<SeriesOut>,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("query {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown video {0:?}")]
    UnknownVideo(String),
}

impl ServiceError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ServiceError::Parse { source, .. } => Some(source.offset),
            _ => None,
        }
    }
}

impl From<QueryError> for ServiceError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::Parse(source) => ServiceError::Parse { index: 0, source },
            other => ServiceError::BadRequest(other.to_string()),
        }
    }
}

/// Error body returned to clients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

impl From<&ServiceError> for ErrorBody {
    fn from(e: &ServiceError) -> Self {
        ErrorBody { error: e.to_string(), offset: e.offset() }
    }
}

fn series_out(line: &QueryLine, series: &TimeSeries, warnings: Vec<String>) -> SeriesOut {
    SeriesOut {
        query: line.query.clone(),
        color: line.color.clone(),
        total_seconds: series.total_millis() as f64 / 1000.0,
        points: series
            .points
            .iter()
            .map(|p| PointOut {
                bucket: p.bucket,
                seconds: p.seconds(),
                value: p.value(),
                denominator_seconds: p.denominator_millis.map(|d| d as f64 / 1000.0),
            })
            .collect(),
        warnings,
    }
}

/// Parses every query first so that no work is done for a bad request.
pub fn run_query(archive: &Archive, req: &QueryRequest, defaults: Defaults) -> Result<QueryResponse, ServiceError> {
    if req.queries.is_empty() {
        return Err(ServiceError::BadRequest("at least one query is required".into()));
    }
    let parsed = req
        .queries
        .iter()
        .enumerate()
        .map(|(index, line)| query::parse(&line.query).map_err(|source| ServiceError::Parse { index, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let bucket = req.bucket.unwrap_or(defaults.bucket);
    let normalize = req.normalize.unwrap_or(defaults.normalize);
    let range = req.date_range.unwrap_or_default();
    let series = req
        .queries
        .iter()
        .zip(&parsed)
        .map(|(line, expr)| {
            let e = query::eval_where(archive, expr, |m| range.contains(m));
            let ts = query::aggregate(archive, &e.sets, bucket, normalize);
            series_out(line, &ts, e.warnings)
        })
        .collect();
    Ok(QueryResponse { bucket, normalize, series })
}

/// The canonical encoding of a response.
pub fn to_json(resp: &QueryResponse) -> String {
    serde_json::to_string(resp).expect("response serializes")
}

pub fn to_csv(resp: &QueryResponse) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["query", "bucket", "seconds", "value"]).expect("in-memory write");
    for s in &resp.series {
        for p in &s.points {
            w.write_record([s.query.as_str(), &p.bucket.to_string(), &p.seconds.to_string(), &p.value.to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipOut {
    pub video: String,
    pub channel: String,
    pub show: String,
    pub air_utc: String,
    pub start_ms: u32,
    pub end_ms: u32,
    pub snippet: String,
}

impl From<Clip> for ClipOut {
    fn from(c: Clip) -> Self {
        ClipOut {
            video: c.name,
            channel: c.channel,
            show: c.show,
            air_utc: format_utc(c.air_utc),
            start_ms: c.interval.start,
            end_ms: c.interval.end,
            snippet: c.snippet,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipsResponse {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub clips: Vec<ClipOut>,
}

pub fn run_clips(
    archive: &Archive,
    query_text: &str,
    page: usize,
    page_size: usize,
    range: DateRange,
) -> Result<ClipsResponse, ServiceError> {
    let expr = query::parse(query_text).map_err(|source| ServiceError::Parse { index: 0, source })?;
    let e = query::eval_where(archive, &expr, |m| range.contains(m));
    let page = query::clips(archive, &e.sets, page, page_size)?;
    Ok(ClipsResponse {
        total: page.total,
        page: page.page,
        page_size: page.page_size,
        clips: page.clips.into_iter().map(ClipOut::from).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaResponse {
    pub videos: usize,
    pub channels: Vec<String>,
    pub shows: Vec<String>,
    pub persons: Vec<String>,
    pub first_air_date: Option<NaiveDate>,
    pub last_air_date: Option<NaiveDate>,
}

pub fn meta(archive: &Archive) -> MetaResponse {
    let videos = archive.videos();
    let channels: BTreeSet<&str> = videos.iter().map(|v| v.channel.as_str()).collect();
    let shows: BTreeSet<&str> = videos.iter().map(|v| v.show.as_str()).collect();
    let mut persons: Vec<String> = archive.persons().iter().map(|p| p.name.clone()).collect();
    persons.sort();
    MetaResponse {
        videos: videos.len(),
        channels: channels.into_iter().map(String::from).collect(),
        shows: shows.into_iter().map(String::from).collect(),
        persons,
        first_air_date: videos.iter().map(|v| utc_date(v.air_utc)).min(),
        last_air_date: videos.iter().map(|v| utc_date(v.air_utc)).max(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoResponse {
    pub id: String,
    pub channel: String,
    pub show: String,
    pub air_utc: String,
    pub duration_ms: u32,
    /// `None` when the video has no captions to detect commercials from.
    pub commercials: Option<Vec<[u32; 2]>>,
}

pub fn video(archive: &Archive, name: &str) -> Result<VideoResponse, ServiceError> {
    let id = archive.video_by_name(name).ok_or_else(|| ServiceError::UnknownVideo(name.to_string()))?;
    let meta = archive.video(id).expect("video exists");
    Ok(VideoResponse {
        id: meta.name.clone(),
        channel: meta.channel.clone(),
        show: meta.show.clone(),
        air_utc: format_utc(meta.air_utc),
        duration_ms: meta.duration,
        commercials: archive.commercials(id).mask().map(|m| m.iter().map(|iv| [iv.start, iv.end]).collect()),
    })
}
