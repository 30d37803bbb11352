use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{bucket_of, Scope};
use crate::archive::{Archive, Gender, PersonId};
use crate::error::AnalyticsError;
use crate::interval::{IntervalSet, VideoId};
use crate::time::BucketUnit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordAssociation {
    pub word: String,
    pub count: u64,
    pub female_hits: u64,
    pub male_hits: u64,
    pub p_female: f64,
    pub p_male: f64,
    pub diff: f64,
}

impl WordAssociation {
    fn new(word: String, count: u64, female_hits: u64, male_hits: u64) -> Self {
        let p_female = ratio(female_hits, count);
        let p_male = ratio(male_hits, count);
        WordAssociation { word, count, female_hits, male_hits, p_female, p_male, diff: p_female - p_male }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WordParams {
    pub min_count: u64,
    /// Share of the most frequent remaining words to keep.
    pub top_fraction: f64,
}

impl Default for WordParams {
    fn default() -> Self {
        WordParams { min_count: 100, top_fraction: 0.10 }
    }
}

/// Words to drop: stop words before the frequency cut, denied names after it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordFilter {
    stopwords: BTreeSet<String>,
    denylist: BTreeSet<String>,
}

impl WordFilter {
    pub fn new<S: AsRef<str>>(stopwords: impl IntoIterator<Item = S>, denylist: impl IntoIterator<Item = S>) -> Self {
        let upper = |it: &mut dyn Iterator<Item = S>| it.map(|s| s.as_ref().trim().to_uppercase()).collect();
        WordFilter {
            stopwords: upper(&mut stopwords.into_iter()),
            denylist: upper(&mut denylist.into_iter()),
        }
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        Self::holds(&self.stopwords, word)
    }

    pub fn is_denied(&self, word: &str) -> bool {
        Self::holds(&self.denylist, word)
    }

    /// Case-insensitive; archive words are already uppercase and skip the copy.
    fn holds(set: &BTreeSet<String>, word: &str) -> bool {
        if word.chars().any(char::is_lowercase) {
            set.contains(&word.to_uppercase())
        } else {
            set.contains(word)
        }
    }
}

fn ratio(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// Per term: utterance count and, for each probe set, how many utterances
/// overlap it.
fn tally<'a, const K: usize>(
    archive: &'a Archive,
    scope: Scope,
    mut probes: impl FnMut(VideoId) -> [Option<&'a IntervalSet>; K],
) -> Vec<(u64, [u64; K])> {
    let mut counts = alloc::vec![(0u64, [0u64; K]); archive.term_count()];
    for video in archive.video_ids() {
        if !scope.covers(archive, video) {
            continue;
        }
        let sets = probes(video);
        for token in archive.tokens(video) {
            if !scope.admits(archive, video, token.t0) {
                continue;
            }
            let entry = &mut counts[archive.term_of(token.word).index()];
            entry.0 += 1;
            let extent = token.extent();
            for (hits, set) in entry.1.iter_mut().zip(&sets) {
                if set.is_some_and(|s| s.overlaps_disjoint(&extent)) {
                    *hits += 1;
                }
            }
        }
    }
    counts
}

/// Co-occurrence with female and male faces for every uttered word, by word.
pub fn word_gender_stats(archive: &Archive, scope: Scope) -> Vec<WordAssociation> {
    let counts = tally(archive, scope, |v| {
        [Some(archive.gender_set(v, Gender::Female)), Some(archive.gender_set(v, Gender::Male))]
    });
    let mut out: Vec<WordAssociation> = counts
        .into_iter()
        .enumerate()
        .filter(|(_, (n, _))| *n > 0)
        .map(|(term, (n, [f, m]))| {
            WordAssociation::new(archive.term_text(crate::archive::TermId(term as u32)).to_string(), n, f, m)
        })
        .collect();
    out.sort_by(|a, b| a.word.cmp(&b.word));
    out
}

/// Probability that an arbitrary utterance overlaps a female (resp. male) face.
pub fn gender_baseline(archive: &Archive, scope: Scope) -> (f64, f64) {
    let (mut n, mut f, mut m) = (0u64, 0u64, 0u64);
    for video in archive.video_ids() {
        let female = archive.gender_set(video, Gender::Female);
        let male = archive.gender_set(video, Gender::Male);
        for token in archive.tokens(video).iter().filter(|t| scope.admits(archive, video, t.t0)) {
            n += 1;
            f += u64::from(female.overlaps_disjoint(&token.extent()));
            m += u64::from(male.overlaps_disjoint(&token.extent()));
        }
    }
    (ratio(f, n), ratio(m, n))
}

/// Frequent words ranked by `p_female - p_male`, most female-associated first.
/// Words below `min_count` and stop words are removed, the `top_fraction`
/// most frequent of the rest (rounded up) are kept, then denied names dropped.
pub fn word_gender_association(
    archive: &Archive,
    params: &WordParams,
    filter: &WordFilter,
    scope: Scope,
) -> Result<Vec<WordAssociation>, AnalyticsError> {
    if !(params.top_fraction > 0.0 && params.top_fraction <= 1.0) {
        return Err(AnalyticsError::Params("top_fraction must be in (0, 1]"));
    }
    let mut words: Vec<WordAssociation> = word_gender_stats(archive, scope)
        .into_iter()
        .filter(|w| w.count >= params.min_count && !filter.is_stopword(&w.word))
        .collect();
    words.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    let keep = libm::ceil(words.len() as f64 * params.top_fraction) as usize;
    words.truncate(keep);
    words.retain(|w| !filter.is_denied(&w.word));
    words.sort_by(|a, b| {
        b.diff
            .total_cmp(&a.diff)
            .then_with(|| b.count.cmp(&a.count))
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(words)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonWord {
    pub word: String,
    pub count: u64,
    pub hits: u64,
    pub probability: f64,
}

fn check_person(archive: &Archive, person: PersonId) -> Result<(), AnalyticsError> {
    match archive.person(person) {
        Some(_) => Ok(()),
        None => Err(AnalyticsError::UnknownPerson(alloc::format!("#{}", person.0))),
    }
}

/// Words uttered at least `min_count` times whose probability of the person
/// being on screen exceeds `threshold`, most probable first.
pub fn unique_words(
    archive: &Archive,
    person: PersonId,
    min_count: u64,
    threshold: f64,
    scope: Scope,
) -> Result<Vec<PersonWord>, AnalyticsError> {
    check_person(archive, person)?;
    let counts = tally(archive, scope, |v| [archive.identity_set_ref(v, person)]);
    let mut out: Vec<PersonWord> = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, (n, [h]))| n >= min_count && n > 0 && ratio(h, n) > threshold)
        .map(|(term, (n, [h]))| PersonWord {
            word: archive.term_text(crate::archive::TermId(term as u32)).to_string(),
            count: n,
            hits: h,
            probability: ratio(h, n),
        })
        .collect();
    out.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| b.count.cmp(&a.count))
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationPoint {
    pub bucket: Option<NaiveDate>,
    pub utterances: u64,
    pub with_person: u64,
    pub tokens: u64,
    pub tokens_with_person: u64,
}

impl AssociationPoint {
    /// Share of phrase utterances with the person on screen.
    pub fn fraction(&self) -> f64 {
        ratio(self.with_person, self.utterances)
    }

    /// Share of all utterances with the person on screen.
    pub fn baseline(&self) -> f64 {
        ratio(self.tokens_with_person, self.tokens)
    }

    fn add(&mut self, other: &AssociationPoint) {
        self.utterances += other.utterances;
        self.with_person += other.with_person;
        self.tokens += other.tokens;
        self.tokens_with_person += other.tokens_with_person;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonWordAssociation {
    pub points: Vec<AssociationPoint>,
    pub total: AssociationPoint,
}

/// How often the person is on screen while any of `phrases` is said, per
/// bucket, with the same measure over all utterances as a baseline.
pub fn person_word_association(
    archive: &Archive,
    person: PersonId,
    phrases: &[&str],
    unit: BucketUnit,
    scope: Scope,
) -> Result<PersonWordAssociation, AnalyticsError> {
    check_person(archive, person)?;
    let phrases: Vec<Vec<&str>> = phrases
        .iter()
        .map(|p| p.split_whitespace().collect::<Vec<_>>())
        .filter(|p| !p.is_empty())
        .collect();
    if phrases.is_empty() {
        return Err(AnalyticsError::Params("at least one phrase is required"));
    }
    let mut buckets: BTreeMap<NaiveDate, AssociationPoint> = BTreeMap::new();

    let mut matches: Vec<_> = phrases
        .iter()
        .filter_map(|p| archive.phrase_terms(p))
        .flat_map(|terms| archive.find_term_phrase(&terms))
        .map(|m| (m.video, m.first, m.last))
        .collect();
    matches.sort_unstable();
    matches.dedup();
    for (video, first, last) in matches {
        let m = crate::archive::PhraseMatch { video, first, last };
        let extent = archive.match_extent(&m);
        if !scope.admits(archive, video, extent.start) {
            continue;
        }
        let point = buckets.entry(bucket_of(archive, unit, video, extent.start)).or_default();
        point.utterances += 1;
        if archive.identity_set_ref(video, person).is_some_and(|s| s.overlaps_disjoint(&extent)) {
            point.with_person += 1;
        }
    }

    for video in archive.video_ids() {
        if !scope.covers(archive, video) {
            continue;
        }
        let set = archive.identity_set_ref(video, person);
        for token in archive.tokens(video).iter().filter(|t| scope.admits(archive, video, t.t0)) {
            let point = buckets.entry(bucket_of(archive, unit, video, token.t0)).or_default();
            point.tokens += 1;
            if set.is_some_and(|s| s.overlaps_disjoint(&token.extent())) {
                point.tokens_with_person += 1;
            }
        }
    }

    let mut total = AssociationPoint::default();
    let points = buckets
        .into_iter()
        .map(|(bucket, mut p)| {
            total.add(&p);
            p.bucket = Some(bucket);
            p
        })
        .collect();
    Ok(PersonWordAssociation { points, total })
}
