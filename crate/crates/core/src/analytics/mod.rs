//! Studies over the archive: word/face co-occurrence, mention and country
//! counting, event coverage, and screen-time shares.
//!
//! A word utterance is a token (or phrase match) and it co-occurs with a face
//! set when its unwidened extent overlaps the set.

mod coverage;
mod mentions;
mod screen;
mod words;

pub use coverage::{event_coverage, Event, EventSeries};
pub use mentions::{
    country_mentions, honorific_scatter, mention_counts, mention_events, CountryAlias, CountryCounts,
    CountryLexicon, MentionCounts, MentionEvent, MentionKind, MentionRule, ScatterPoint,
};
pub use screen::{
    age_years, group_share, hair_groups, screenhog, weighted_age, AgePoint, Screenhog, SharePoint,
    DEFAULT_MIN_SHOW_HOURS,
};
pub use words::{
    gender_baseline, person_word_association, unique_words, word_gender_association, word_gender_stats,
    AssociationPoint, PersonWord, PersonWordAssociation, WordAssociation, WordFilter, WordParams,
};

use chrono::NaiveDate;

use crate::archive::Archive;
use crate::interval::{IntervalSet, TimePoint, VideoId};
use crate::time::{utc_date, BucketUnit, UtcMillis};

/// Which part of each video an analysis looks at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scope {
    /// News content only; videos without a commercial mask are skipped.
    #[default]
    NewsContent,
    /// Everything, commercials included.
    All,
}

impl Scope {
    /// Whether an utterance starting at `t` counts.
    fn admits(self, archive: &Archive, video: VideoId, t: TimePoint) -> bool {
        match self {
            Scope::All => true,
            Scope::NewsContent => archive.news_content(video).is_some_and(|news| news.contains_disjoint(t)),
        }
    }

    /// Whether any of the video is in scope.
    fn covers(self, archive: &Archive, video: VideoId) -> bool {
        match self {
            Scope::All => true,
            Scope::NewsContent => archive.news_content(video).is_some(),
        }
    }

    /// Restricts a screen-time set to the scope and the video bounds.
    fn restrict(self, archive: &Archive, set: &IntervalSet) -> IntervalSet {
        let video = set.video();
        match self {
            Scope::All => set.clip_to(archive.video(video).expect("video exists").duration),
            Scope::NewsContent => match archive.news_content(video) {
                Some(news) => set.intersect(news).expect("same video"),
                None => IntervalSet::empty(video),
            },
        }
    }
}

fn air_utc(archive: &Archive, video: VideoId) -> UtcMillis {
    archive.video(video).expect("video exists").air_utc
}

fn bucket_of(archive: &Archive, unit: BucketUnit, video: VideoId, t: TimePoint) -> NaiveDate {
    unit.bucket_start(utc_date(air_utc(archive, video) + UtcMillis::from(t)))
}
