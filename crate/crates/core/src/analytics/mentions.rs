use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use super::{bucket_of, Scope};
use crate::archive::{Archive, PersonId, TermId};
use crate::error::AnalyticsError;
use crate::interval::{Interval, VideoId};
use crate::time::BucketUnit;

fn words(phrase: &str) -> Vec<String> {
    phrase.split_whitespace().map(str::to_uppercase).collect()
}

/// How occurrences of a name are classified. Phrases are whitespace-separated
/// words matched case-insensitively.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MentionRule {
    pub name: String,
    pub target: String,
    /// Prefix phrases that make an occurrence honorific ("PRESIDENT").
    pub honorifics: Vec<String>,
    /// Single words that exclude an occurrence when they precede it ("THE").
    pub excluded_prev: Vec<String>,
    /// Single words that exclude an occurrence when they follow it ("ADMINISTRATION").
    pub excluded_next: Vec<String>,
    /// First names of other people sharing the surname ("IVANKA").
    pub excluded_first_names: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Honorific,
    Bare,
    Excluded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionEvent {
    pub video: VideoId,
    /// Index of the first target token.
    pub pos: u32,
    pub extent: Interval,
    pub kind: MentionKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionCounts {
    pub honorific: u64,
    pub bare: u64,
    pub excluded: u64,
}

impl MentionCounts {
    pub fn total(&self) -> u64 {
        self.honorific + self.bare + self.excluded
    }

    /// Honorific share of the counted (non-excluded) references.
    pub fn honorific_fraction(&self) -> Option<f64> {
        let refs = self.honorific + self.bare;
        (refs > 0).then(|| self.honorific as f64 / refs as f64)
    }

    fn record(&mut self, kind: MentionKind) {
        match kind {
            MentionKind::Honorific => self.honorific += 1,
            MentionKind::Bare => self.bare += 1,
            MentionKind::Excluded => self.excluded += 1,
        }
    }
}

/// A rule with words resolved to terms. Words absent from the archive
/// resolve to `None` and never match.
struct Compiled {
    target: Vec<TermId>,
    honorifics: Vec<Vec<Option<TermId>>>,
    excluded_before: Vec<TermId>,
    excluded_after: Vec<TermId>,
}

impl Compiled {
    fn new(archive: &Archive, rule: &MentionRule) -> Result<Option<Self>, AnalyticsError> {
        let target = words(&rule.target);
        if target.is_empty() {
            return Err(AnalyticsError::EmptyTarget);
        }
        let Some(target) = target.iter().map(|w| archive.term_id(w)).collect::<Option<Vec<_>>>() else {
            return Ok(None);
        };
        let single = |list: &[String]| -> Vec<TermId> { list.iter().filter_map(|w| archive.term_id(w.trim())).collect() };
        let mut excluded_before = single(&rule.excluded_prev);
        excluded_before.extend(single(&rule.excluded_first_names));
        Ok(Some(Compiled {
            target,
            honorifics: rule
                .honorifics
                .iter()
                .map(|h| words(h).iter().map(|w| archive.term_id(w)).collect::<Vec<_>>())
                .filter(|h| !h.is_empty())
                .collect(),
            excluded_before,
            excluded_after: single(&rule.excluded_next),
        }))
    }

    fn classify(&self, terms: &[TermId], pos: usize) -> MentionKind {
        let end = pos + self.target.len();
        let honorific = self.honorifics.iter().any(|h| {
            pos >= h.len() && h.iter().zip(&terms[pos - h.len()..pos]).all(|(w, t)| *w == Some(*t))
        });
        if honorific {
            return MentionKind::Honorific;
        }
        let before = pos.checked_sub(1).map(|i| terms[i]);
        let after = terms.get(end).copied();
        if before.is_some_and(|t| self.excluded_before.contains(&t))
            || after.is_some_and(|t| self.excluded_after.contains(&t))
        {
            MentionKind::Excluded
        } else {
            MentionKind::Bare
        }
    }
}

fn video_terms(archive: &Archive, video: VideoId) -> Vec<TermId> {
    archive.tokens(video).iter().map(|t| archive.term_of(t.word)).collect()
}

fn span_extent(archive: &Archive, video: VideoId, first: usize, last: usize) -> Interval {
    archive.match_extent(&crate::archive::PhraseMatch { video, first: first as u32, last: last as u32 })
}

/// Every occurrence of the rule's target (overlapping occurrences included)
/// in token order, classified.
pub fn mention_events(archive: &Archive, rule: &MentionRule, scope: Scope) -> Result<Vec<MentionEvent>, AnalyticsError> {
    let Some(rule) = Compiled::new(archive, rule)? else { return Ok(Vec::new()) };
    let n = rule.target.len();
    let mut out = Vec::new();
    let mut videos: Vec<VideoId> = archive.postings(rule.target[0]).iter().map(|&(v, _)| v).collect();
    videos.dedup();
    for video in videos {
        if !scope.covers(archive, video) {
            continue;
        }
        let terms = video_terms(archive, video);
        for pos in 0..terms.len().saturating_sub(n - 1) {
            if terms[pos..pos + n] != rule.target[..] {
                continue;
            }
            let extent = span_extent(archive, video, pos, pos + n - 1);
            if scope.admits(archive, video, extent.start) {
                out.push(MentionEvent { video, pos: pos as u32, extent, kind: rule.classify(&terms, pos) });
            }
        }
    }
    Ok(out)
}

/// Classified occurrence counts per calendar bucket.
pub fn mention_counts(
    archive: &Archive,
    rule: &MentionRule,
    unit: BucketUnit,
    scope: Scope,
) -> Result<BTreeMap<NaiveDate, MentionCounts>, AnalyticsError> {
    let mut out: BTreeMap<NaiveDate, MentionCounts> = BTreeMap::new();
    for e in mention_events(archive, rule, scope)? {
        out.entry(bucket_of(archive, unit, e.video, e.extent.start)).or_default().record(e.kind);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub person: PersonId,
    pub name: String,
    pub a: MentionCounts,
    pub b: MentionCounts,
    pub x: f64,
    pub y: f64,
}

/// Honorific fractions of two rules for each presenter. With `on_screen`,
/// only mentions overlapping the presenter's face count; otherwise only
/// mentions on the presenter's channels while they are off screen. Presenters
/// with fewer than `min_mentions` counted references under either rule are
/// omitted.
pub fn honorific_scatter(
    archive: &Archive,
    presenters: &[PersonId],
    rule_a: &MentionRule,
    rule_b: &MentionRule,
    on_screen: bool,
    min_mentions: u64,
    scope: Scope,
) -> Result<Vec<ScatterPoint>, AnalyticsError> {
    let events_a = mention_events(archive, rule_a, scope)?;
    let events_b = mention_events(archive, rule_b, scope)?;
    let mut out = Vec::new();
    for &person in presenters {
        let Some(p) = archive.person(person) else {
            return Err(AnalyticsError::UnknownPerson(alloc::format!("#{}", person.0)));
        };
        let tally = |events: &[MentionEvent]| {
            let mut counts = MentionCounts::default();
            for e in events {
                let visible = archive.identity_set_ref(e.video, person).is_some_and(|s| s.overlaps_disjoint(&e.extent));
                let keep = if on_screen {
                    visible
                } else {
                    !visible && p.presents_on(&archive.video(e.video).expect("video exists").channel)
                };
                if keep {
                    counts.record(e.kind);
                }
            }
            counts
        };
        let (a, b) = (tally(&events_a), tally(&events_b));
        if a.honorific + a.bare < min_mentions || b.honorific + b.bare < min_mentions {
            continue;
        }
        let (Some(x), Some(y)) = (a.honorific_fraction(), b.honorific_fraction()) else { continue };
        out.push(ScatterPoint { person, name: p.name.clone(), a, b, x, y });
    }
    Ok(out)
}

/// One alias line: `alias` names `country` unless preceded by one of
/// `excluded_prev`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryAlias {
    pub country: String,
    pub alias: String,
    #[serde(default)]
    pub excluded_prev: Vec<String>,
}

struct Alias {
    country: usize,
    words: Vec<String>,
    excluded_prev: Vec<String>,
}

/// Countries and their aliases. Countries omitted from the lexicon are not
/// counted at all.
pub struct CountryLexicon {
    countries: Vec<String>,
    /// Longest first.
    aliases: Vec<Alias>,
}

impl CountryLexicon {
    pub fn new(entries: impl IntoIterator<Item = CountryAlias>) -> Result<Self, AnalyticsError> {
        let mut countries: Vec<String> = Vec::new();
        let mut by_text: HashMap<Vec<String>, usize> = HashMap::new();
        let mut aliases: Vec<Alias> = Vec::new();
        for entry in entries {
            let alias_words = words(&entry.alias);
            if alias_words.is_empty() {
                return Err(AnalyticsError::EmptyTarget);
            }
            let country = match countries.iter().position(|c| *c == entry.country) {
                Some(i) => i,
                None => {
                    countries.push(entry.country.clone());
                    countries.len() - 1
                }
            };
            let excluded: Vec<String> = entry.excluded_prev.iter().flat_map(|w| words(w)).collect();
            match by_text.get(&alias_words) {
                Some(&i) if aliases[i].country != country => {
                    return Err(AnalyticsError::DuplicateAlias(entry.alias.to_uppercase()));
                }
                Some(&i) => aliases[i].excluded_prev.extend(excluded),
                None => {
                    by_text.insert(alias_words.clone(), aliases.len());
                    aliases.push(Alias { country, words: alias_words, excluded_prev: excluded });
                }
            }
        }
        aliases.sort_by(|a, b| b.words.len().cmp(&a.words.len()));
        Ok(CountryLexicon { countries, aliases })
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryCounts {
    pub countries: Vec<String>,
    /// Per bucket, counts indexed like `countries`.
    pub buckets: BTreeMap<NaiveDate, Vec<u64>>,
    pub totals: Vec<u64>,
}

/// Counts country mentions. Scanning left to right, the longest alias
/// starting at each token wins and its tokens are consumed; a match preceded
/// by one of its excluded words is consumed but not counted.
pub fn country_mentions(
    archive: &Archive,
    lexicon: &CountryLexicon,
    unit: BucketUnit,
    scope: Scope,
) -> CountryCounts {
    let resolve = |w: &String| archive.term_id(w);
    let aliases: Vec<(usize, Vec<TermId>, Vec<TermId>)> = lexicon
        .aliases
        .iter()
        .filter_map(|a| {
            let seq = a.words.iter().map(resolve).collect::<Option<Vec<_>>>()?;
            Some((a.country, seq, a.excluded_prev.iter().filter_map(resolve).collect()))
        })
        .collect();
    let mut by_first: HashMap<TermId, Vec<usize>> = HashMap::new();
    for (i, (_, seq, _)) in aliases.iter().enumerate() {
        by_first.entry(seq[0]).or_default().push(i);
    }

    let n = lexicon.countries.len();
    let mut counts = CountryCounts { countries: lexicon.countries.clone(), totals: alloc::vec![0; n], ..Default::default() };
    for video in archive.video_ids() {
        if !scope.covers(archive, video) {
            continue;
        }
        let terms = video_terms(archive, video);
        let mut i = 0;
        while i < terms.len() {
            let hit = by_first.get(&terms[i]).and_then(|cands| {
                cands.iter().copied().find(|&c| terms[i..].starts_with(&aliases[c].1))
            });
            let Some(c) = hit else {
                i += 1;
                continue;
            };
            let (country, seq, excluded) = &aliases[c];
            let excluded = i > 0 && excluded.contains(&terms[i - 1]);
            let extent = span_extent(archive, video, i, i + seq.len() - 1);
            if !excluded && scope.admits(archive, video, extent.start) {
                counts.totals[*country] += 1;
                let bucket = counts
                    .buckets
                    .entry(bucket_of(archive, unit, video, extent.start))
                    .or_insert_with(|| alloc::vec![0; n]);
                bucket[*country] += 1;
            }
            i += seq.len();
        }
    }
    counts
}

impl CountryCounts {
    pub fn total_for(&self, country: &str) -> u64 {
        self.countries.iter().position(|c| c == country).map_or(0, |i| self.totals[i])
    }
}

impl core::fmt::Debug for CountryLexicon {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CountryLexicon")
            .field("countries", &self.countries.len())
            .field("aliases", &self.aliases.len())
            .finish()
    }
}

impl MentionRule {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if words(&self.target).is_empty() {
            Err(AnalyticsError::EmptyTarget)
        } else {
            Ok(())
        }
    }

    pub fn target_words(&self) -> Vec<String> {
        words(&self.target)
    }
}

impl CountryAlias {
    pub fn new(country: &str, alias: &str, excluded_prev: &[&str]) -> Self {
        CountryAlias {
            country: country.to_string(),
            alias: alias.to_string(),
            excluded_prev: excluded_prev.iter().map(|s| s.to_string()).collect(),
        }
    }
}
