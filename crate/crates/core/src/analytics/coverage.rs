use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use super::{bucket_of, Scope};
use crate::archive::Archive;
use crate::error::AnalyticsError;
use crate::interval::VideoId;
use crate::time::BucketUnit;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub date: NaiveDate,
    pub category: String,
    pub name: String,
    /// Phrases whose mentions count toward the event.
    pub terms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSeries {
    pub name: String,
    pub category: String,
    pub date: NaiveDate,
    /// Mentions on day 0, 1, ... after the event.
    pub daily: Vec<u64>,
}

/// Daily mention counts for each event over `window_days` days, cut short
/// at the next later event of the same category.
pub fn event_coverage(
    archive: &Archive,
    events: &[Event],
    window_days: u32,
    scope: Scope,
) -> Result<Vec<EventSeries>, AnalyticsError> {
    if window_days == 0 {
        return Err(AnalyticsError::Params("window_days must be positive"));
    }
    // Phrase -> (video, first token, day) of each in-scope match.
    let mut per_phrase: HashMap<String, Vec<(VideoId, u32, NaiveDate)>> = HashMap::new();
    for phrase in events.iter().flat_map(|e| &e.terms) {
        let key = phrase.to_uppercase();
        if per_phrase.contains_key(&key) {
            continue;
        }
        let words: Vec<&str> = key.split_whitespace().collect();
        let hits = archive
            .phrase_terms(&words)
            .map(|t| archive.find_term_phrase(&t))
            .unwrap_or_default()
            .into_iter()
            .filter_map(|m| {
                let start = archive.match_extent(&m).start;
                scope
                    .admits(archive, m.video, start)
                    .then(|| (m.video, m.first, bucket_of(archive, BucketUnit::Day, m.video, start)))
            })
            .collect();
        per_phrase.insert(key, hits);
    }

    let mut out = Vec::with_capacity(events.len());
    for event in events {
        let next = events
            .iter()
            .filter(|o| o.category == event.category && o.date > event.date)
            .map(|o| o.date)
            .min();
        let len = match next {
            Some(d) => ((d - event.date).num_days() as u32).min(window_days),
            None => window_days,
        };
        // Matches of different phrases starting at the same token count once.
        let mut hits: Vec<(VideoId, u32, NaiveDate)> =
            event.terms.iter().flat_map(|t| per_phrase[&t.to_uppercase()].iter().copied()).collect();
        hits.sort_unstable();
        hits.dedup();
        let mut daily = vec![0u64; len as usize];
        for (_, _, day) in hits {
            let k = (day - event.date).num_days();
            if (0..i64::from(len)).contains(&k) {
                daily[k as usize] += 1;
            }
        }
        out.push(EventSeries { name: event.name.clone(), category: event.category.clone(), date: event.date, daily });
    }
    Ok(out)
}
