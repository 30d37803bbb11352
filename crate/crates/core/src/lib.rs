//! Temporal-label analytics over annotated TV-news archives.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO: file formats,
//! snapshots, the CLI and the HTTP service live in the `newsframe` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod archive;
pub mod detectors;
pub mod error;
pub mod interval;
pub mod labeler;
pub mod query;
pub mod time;

pub use archive::{Archive, ArchiveBuilder, ArchiveConfig, Gender, PersonId, VideoMeta};
pub use error::{AnalyticsError, ArchiveError, DetectError, IntervalError, LabelError, ParseError, QueryError};
pub use interval::{Interval, IntervalSet, Merge, Millis, Predicate, TimePoint, VideoId};
