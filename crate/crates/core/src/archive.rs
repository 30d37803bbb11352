//! The immutable in-memory archive every query reads.
//!
//! An [`Archive`] is assembled with an [`ArchiveBuilder`], which validates
//! records as they arrive. `build` then derives the per-video indexes: face
//! interval sets per gender and per identity, the presenter set, commercial
//! masks and the caption phrase index.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;
use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::detectors::{self, CaptionSpan, CommercialOutcome, CommercialParams, LuminanceSample};
use crate::error::ArchiveError;
use crate::interval::{Interval, IntervalSet, Millis, TimePoint, VideoId};
use crate::time::{LocalClock, UtcMillis};

pub const DESCRIPTOR_DIM: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PersonId(pub u32);

impl PersonId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned caption token text, case preserved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WordId(pub u32);

/// Interned uppercase token text; the unit of case-insensitive matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }

    fn slot(self) -> usize {
        match self {
            Gender::Male => 0,
            Gender::Female => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HairColor {
    Blonde,
    Brown,
    Black,
    Other,
}

impl HairColor {
    /// Accepts the four analysis groups plus the finer annotation labels
    /// (red, white/gray, bald), which collapse into `Other`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blonde" | "blond" => Some(HairColor::Blonde),
            "brown" => Some(HairColor::Brown),
            "black" => Some(HairColor::Black),
            "other" | "red" | "white" | "gray" | "grey" | "white/gray" | "bald" => Some(HairColor::Other),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HairColor::Blonde => "blonde",
            HairColor::Brown => "brown",
            HairColor::Black => "black",
            HairColor::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoMeta {
    /// External identifier from `videos.jsonl`.
    pub name: String,
    pub channel: String,
    pub show: String,
    pub air_utc: UtcMillis,
    pub duration: Millis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityLabel {
    pub person: PersonId,
    pub score: f32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceEvent {
    pub video: VideoId,
    pub t: TimePoint,
    pub bbox: [f32; 4],
    pub gender: Gender,
    pub gender_score: f32,
    pub identity: Option<IdentityLabel>,
    pub descriptor: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub word: WordId,
    pub seq: u32,
    pub t0: TimePoint,
    pub t1: TimePoint,
}

impl Token {
    pub fn extent(&self) -> Interval {
        detectors::token_extent(self.t0, self.t1)
    }
}

/// A registered individual. Identities that only appear as face labels are
/// registered with no attributes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub name: String,
    pub presenter_on: Vec<String>,
    pub gender: Option<Gender>,
    pub birthdate: Option<NaiveDate>,
    pub hair: Option<HairColor>,
}

impl Person {
    pub fn named(name: impl Into<String>) -> Self {
        Person { name: name.into(), ..Default::default() }
    }

    pub fn presents_on(&self, channel: &str) -> bool {
        self.presenter_on.iter().any(|c| c.eq_ignore_ascii_case(channel))
    }

    pub fn is_presenter(&self) -> bool {
        !self.presenter_on.is_empty()
    }
}

/// Flat store of 128-dimensional face descriptors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptorStore {
    data: Vec<f32>,
}

impl DescriptorStore {
    pub fn new(data: Vec<f32>) -> Result<Self, ArchiveError> {
        if !data.len().is_multiple_of(DESCRIPTOR_DIM) {
            return Err(ArchiveError::DescriptorShape(data.len()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(ArchiveError::NonFiniteDescriptor(pos / DESCRIPTOR_DIM));
        }
        Ok(DescriptorStore { data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / DESCRIPTOR_DIM
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&[f32]> {
        self.data.get(index * DESCRIPTOR_DIM..(index + 1) * DESCRIPTOR_DIM)
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchiveConfig {
    /// Each face detection at `t` covers `[t, t + sample_period)`.
    pub sample_period: Millis,
    pub commercials: CommercialParams,
    pub clock: LocalClock,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        ArchiveConfig { sample_period: 3_000, commercials: CommercialParams::default(), clock: LocalClock::default() }
    }
}

/// Raw validated records; everything else in an [`Archive`] derives from these.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Records {
    pub videos: Vec<VideoMeta>,
    pub persons: Vec<Person>,
    /// Raw token texts indexed by [`WordId`].
    pub words: Vec<String>,
    /// Per video, in `seq` order.
    pub tokens: Vec<Vec<Token>>,
    /// Per video, time-ordered.
    pub luminance: Vec<Vec<LuminanceSample>>,
    /// Sorted by (video, t).
    pub faces: Vec<FaceEvent>,
    pub descriptors: DescriptorStore,
}

/// Accumulates and validates records before indexing.
#[derive(Debug, Default)]
pub struct ArchiveBuilder {
    records: Records,
    video_names: HashMap<String, VideoId>,
    airings: HashMap<(String, String, i64), VideoId>,
    person_names: HashMap<String, PersonId>,
    // Persons whose attributes came from the registry rather than a face label.
    registered: Vec<bool>,
    word_ids: HashMap<String, WordId>,
}

impl ArchiveBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_video(&mut self, meta: VideoMeta) -> Result<VideoId, ArchiveError> {
        if meta.duration == 0 {
            return Err(ArchiveError::ZeroDuration(meta.name));
        }
        if self.video_names.contains_key(&meta.name) {
            return Err(ArchiveError::DuplicateVideo(meta.name));
        }
        let airing = (meta.channel.clone(), meta.show.clone(), meta.air_utc);
        if self.airings.contains_key(&airing) {
            return Err(ArchiveError::DuplicateAiring { channel: airing.0, show: airing.1, air_utc_ms: airing.2 });
        }
        let id = VideoId(self.records.videos.len() as u32);
        self.video_names.insert(meta.name.clone(), id);
        self.airings.insert(airing, id);
        self.records.videos.push(meta);
        self.records.tokens.push(Vec::new());
        self.records.luminance.push(Vec::new());
        Ok(id)
    }

    pub fn video_id(&self, name: &str) -> Option<VideoId> {
        self.video_names.get(name).copied()
    }

    pub fn video(&self, id: VideoId) -> Option<&VideoMeta> {
        self.records.videos.get(id.index())
    }

    /// Registers a person from the registry. A name already seen as a bare
    /// face label is enriched in place; a second registry entry is an error.
    pub fn add_person(&mut self, person: Person) -> Result<PersonId, ArchiveError> {
        let key = person.name.to_uppercase();
        if let Some(&id) = self.person_names.get(&key) {
            if self.registered[id.index()] {
                return Err(ArchiveError::DuplicatePerson(person.name));
            }
            self.registered[id.index()] = true;
            let name = core::mem::take(&mut self.records.persons[id.index()].name);
            self.records.persons[id.index()] = Person { name, ..person };
            return Ok(id);
        }
        let id = self.push_person(key, person);
        self.registered[id.index()] = true;
        Ok(id)
    }

    /// Looks up a person case-insensitively, registering a bare entry if absent.
    pub fn person_or_register(&mut self, name: &str) -> PersonId {
        let key = name.to_uppercase();
        match self.person_names.get(&key) {
            Some(&id) => id,
            None => self.push_person(key, Person::named(name)),
        }
    }

    fn push_person(&mut self, key: String, person: Person) -> PersonId {
        let id = PersonId(self.records.persons.len() as u32);
        self.person_names.insert(key, id);
        self.records.persons.push(person);
        self.registered.push(false);
        id
    }

    pub fn intern_word(&mut self, text: &str) -> WordId {
        if let Some(&id) = self.word_ids.get(text) {
            return id;
        }
        let id = WordId(self.records.words.len() as u32);
        self.records.words.push(text.to_string());
        self.word_ids.insert(text.to_string(), id);
        id
    }

    pub fn add_face(&mut self, face: FaceEvent) -> Result<(), ArchiveError> {
        let duration = self.duration_of(face.video)?;
        if face.t >= duration {
            return Err(ArchiveError::FaceOutsideVideo { video: face.video, t: face.t, duration });
        }
        let [x0, y0, x1, y1] = face.bbox;
        let unit = |v: f32| (0.0..=1.0).contains(&v);
        if !(x0 < x1 && y0 < y1 && face.bbox.iter().all(|&v| unit(v))) {
            return Err(ArchiveError::InvalidBox(face.bbox));
        }
        if !unit(face.gender_score) {
            return Err(ArchiveError::InvalidScore(face.gender_score));
        }
        if let Some(label) = face.identity {
            if !unit(label.score) {
                return Err(ArchiveError::InvalidScore(label.score));
            }
            if label.person.index() >= self.records.persons.len() {
                return Err(ArchiveError::UnknownPerson(alloc::format!("#{}", label.person.0)));
            }
        }
        self.records.faces.push(face);
        Ok(())
    }

    /// Tokens of one video must arrive in strictly increasing `seq` order.
    pub fn add_token(&mut self, video: VideoId, token: Token) -> Result<(), ArchiveError> {
        self.duration_of(video)?;
        if token.t1 < token.t0 {
            return Err(ArchiveError::TokenReversed { video, t0: token.t0, t1: token.t1 });
        }
        let tokens = &mut self.records.tokens[video.index()];
        if let Some(last) = tokens.last() {
            if token.seq <= last.seq {
                return Err(ArchiveError::NonMonotoneSeq { video, seq: token.seq, previous: last.seq });
            }
        }
        tokens.push(token);
        Ok(())
    }

    pub fn add_luminance(&mut self, video: VideoId, sample: LuminanceSample) -> Result<(), ArchiveError> {
        self.duration_of(video)?;
        if !(0.0..=1.0).contains(&sample.value) {
            return Err(ArchiveError::InvalidLuminance(sample.value));
        }
        let samples = &mut self.records.luminance[video.index()];
        if samples.last().is_some_and(|last| last.t > sample.t) {
            return Err(ArchiveError::LuminanceOrder { video, t: sample.t });
        }
        samples.push(sample);
        Ok(())
    }

    pub fn set_descriptors(&mut self, store: DescriptorStore) {
        self.records.descriptors = store;
    }

    fn duration_of(&self, video: VideoId) -> Result<Millis, ArchiveError> {
        self.records
            .videos
            .get(video.index())
            .map(|v| v.duration)
            .ok_or_else(|| ArchiveError::UnknownVideo(alloc::format!("{video}")))
    }

    pub fn build(self, config: ArchiveConfig) -> Result<Archive, ArchiveError> {
        Archive::from_records(self.records, config)
    }
}

/// Per-video derived state.
#[derive(Clone, Debug)]
pub struct VideoIndex {
    /// Range into `Records::faces`.
    pub faces: core::ops::Range<usize>,
    /// Canonical face coverage per gender (male, female).
    gender: [IntervalSet; 2],
    /// Canonical coverage per identity, sorted by person.
    identities: Vec<(PersonId, IntervalSet)>,
    /// Union of identity sets of persons presenting on this video's channel.
    presenters: IntervalSet,
    commercials: CommercialOutcome,
    /// Video minus commercials; `None` when commercials are unknown.
    news: Option<IntervalSet>,
}

/// One phrase occurrence: token positions `first..=last` in a video.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhraseMatch {
    pub video: VideoId,
    pub first: u32,
    pub last: u32,
}

/// Indexed, immutable snapshot.
#[derive(Debug)]
pub struct Archive {
    records: Records,
    config: ArchiveConfig,
    videos: Vec<VideoIndex>,
    person_lookup: HashMap<String, PersonId>,
    /// Videos in which each person has an identity label.
    person_videos: Vec<Vec<VideoId>>,
    word_term: Vec<TermId>,
    terms: Vec<String>,
    term_lookup: HashMap<String, TermId>,
    /// CSR postings: occurrences of term `i` are `postings[offsets[i]..offsets[i+1]]`.
    offsets: Vec<usize>,
    postings: Vec<(VideoId, u32)>,
}

impl Archive {
    pub fn empty() -> Self {
        Self::from_records(Records::default(), ArchiveConfig::default()).expect("empty archive is valid")
    }

    /// Validates cross-references and derives every index.
    pub fn from_records(records: Records, config: ArchiveConfig) -> Result<Self, ArchiveError> {
        if config.sample_period == 0 {
            return Err(ArchiveError::Config("sample_period must be positive"));
        }
        config.commercials.validate().map_err(|_| ArchiveError::Config("invalid commercial parameters"))?;
        let mut records = records;
        let n_videos = records.videos.len();
        if records.tokens.len() != n_videos || records.luminance.len() != n_videos {
            return Err(ArchiveError::Config("per-video token/luminance tables do not match the video list"));
        }
        for face in &records.faces {
            let video = records
                .videos
                .get(face.video.index())
                .ok_or_else(|| ArchiveError::UnknownVideo(alloc::format!("{}", face.video)))?;
            if face.t >= video.duration {
                return Err(ArchiveError::FaceOutsideVideo { video: face.video, t: face.t, duration: video.duration });
            }
            if let Some(idx) = face.descriptor {
                if idx as usize >= records.descriptors.len() {
                    return Err(ArchiveError::DanglingDescriptor { index: idx, count: records.descriptors.len() });
                }
            }
            if let Some(label) = face.identity {
                if label.person.index() >= records.persons.len() {
                    return Err(ArchiveError::UnknownPerson(alloc::format!("#{}", label.person.0)));
                }
            }
        }
        for tokens in &records.tokens {
            if tokens.iter().any(|t| t.word.0 as usize >= records.words.len()) {
                return Err(ArchiveError::Config("token references an unknown word"));
            }
        }
        records.faces.sort_by_key(|f| (f.video, f.t));

        let mut person_lookup = HashMap::with_capacity(records.persons.len());
        for (i, p) in records.persons.iter().enumerate() {
            if person_lookup.insert(p.name.to_uppercase(), PersonId(i as u32)).is_some() {
                return Err(ArchiveError::DuplicatePerson(p.name.clone()));
            }
        }

        let (word_term, terms, term_lookup) = build_terms(&records.words);
        let (offsets, postings) = build_postings(&records.tokens, &word_term, terms.len());

        let mut videos = Vec::with_capacity(n_videos);
        let mut person_videos = vec![Vec::new(); records.persons.len()];
        let mut face_cursor = 0;
        let word_flags: Vec<(bool, bool)> = records
            .words
            .iter()
            .map(|w| (w.contains(">>"), w.chars().any(char::is_lowercase)))
            .collect();
        for (i, meta) in records.videos.iter().enumerate() {
            let video = VideoId(i as u32);
            let start = face_cursor;
            while face_cursor < records.faces.len() && records.faces[face_cursor].video == video {
                face_cursor += 1;
            }
            let faces = &records.faces[start..face_cursor];
            let index = index_video(
                video,
                meta,
                faces,
                start..face_cursor,
                &records.tokens[i],
                &records.luminance[i],
                &word_flags,
                &records.persons,
                &config,
            );
            for (person, _) in &index.identities {
                person_videos[person.index()].push(video);
            }
            videos.push(index);
        }

        Ok(Archive {
            records,
            config,
            videos,
            person_lookup,
            person_videos,
            word_term,
            terms,
            term_lookup,
            offsets,
            postings,
        })
    }

    pub fn records(&self) -> &Records {
        &self.records
    }

    pub fn into_records(self) -> (Records, ArchiveConfig) {
        (self.records, self.config)
    }

    pub fn config(&self) -> &ArchiveConfig {
        &self.config
    }

    pub fn video_count(&self) -> usize {
        self.records.videos.len()
    }

    pub fn video_ids(&self) -> impl Iterator<Item = VideoId> + '_ {
        (0..self.records.videos.len() as u32).map(VideoId)
    }

    pub fn video(&self, id: VideoId) -> Option<&VideoMeta> {
        self.records.videos.get(id.index())
    }

    pub fn videos(&self) -> &[VideoMeta] {
        &self.records.videos
    }

    pub fn video_by_name(&self, name: &str) -> Option<VideoId> {
        self.records.videos.iter().position(|v| v.name == name).map(|i| VideoId(i as u32))
    }

    pub fn persons(&self) -> &[Person] {
        &self.records.persons
    }

    pub fn person(&self, id: PersonId) -> Option<&Person> {
        self.records.persons.get(id.index())
    }

    /// Case-insensitive name lookup.
    pub fn person_id(&self, name: &str) -> Option<PersonId> {
        self.person_lookup.get(&name.trim().to_uppercase()).copied()
    }

    pub fn faces(&self, video: VideoId) -> &[FaceEvent] {
        self.videos.get(video.index()).map_or(&[], |v| &self.records.faces[v.faces.clone()])
    }

    pub fn all_faces(&self) -> &[FaceEvent] {
        &self.records.faces
    }

    pub fn tokens(&self, video: VideoId) -> &[Token] {
        self.records.tokens.get(video.index()).map_or(&[], Vec::as_slice)
    }

    pub fn token_count(&self) -> usize {
        self.records.tokens.iter().map(Vec::len).sum()
    }

    pub fn luminance(&self, video: VideoId) -> &[LuminanceSample] {
        self.records.luminance.get(video.index()).map_or(&[], Vec::as_slice)
    }

    pub fn descriptors(&self) -> &DescriptorStore {
        &self.records.descriptors
    }

    pub fn word_text(&self, word: WordId) -> &str {
        &self.records.words[word.0 as usize]
    }

    pub fn term_of(&self, word: WordId) -> TermId {
        self.word_term[word.0 as usize]
    }

    pub fn term_text(&self, term: TermId) -> &str {
        &self.terms[term.index()]
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Case-insensitive term lookup.
    pub fn term_id(&self, text: &str) -> Option<TermId> {
        self.term_lookup.get(&text.to_uppercase()).copied()
    }

    /// Number of occurrences of `term` across the archive.
    pub fn term_frequency(&self, term: TermId) -> usize {
        self.offsets[term.index() + 1] - self.offsets[term.index()]
    }

    /// Occurrences of `term` sorted by (video, position).
    pub fn postings(&self, term: TermId) -> &[(VideoId, u32)] {
        &self.postings[self.offsets[term.index()]..self.offsets[term.index() + 1]]
    }

    /// Canonical face coverage for one gender.
    pub fn gender_set(&self, video: VideoId, gender: Gender) -> &IntervalSet {
        &self.videos[video.index()].gender[gender.slot()]
    }

    /// Canonical face coverage for one identity (empty if never labelled).
    pub fn identity_set(&self, video: VideoId, person: PersonId) -> IntervalSet {
        self.identity_set_ref(video, person).cloned().unwrap_or_else(|| IntervalSet::empty(video))
    }

    pub fn identity_set_ref(&self, video: VideoId, person: PersonId) -> Option<&IntervalSet> {
        let ids = &self.videos[video.index()].identities;
        ids.binary_search_by_key(&person, |(p, _)| *p).ok().map(|i| &ids[i].1)
    }

    pub fn identities_in(&self, video: VideoId) -> &[(PersonId, IntervalSet)] {
        &self.videos[video.index()].identities
    }

    /// Videos in which `person` has at least one identity label.
    pub fn videos_with(&self, person: PersonId) -> &[VideoId] {
        self.person_videos.get(person.index()).map_or(&[], Vec::as_slice)
    }

    pub fn presenter_set(&self, video: VideoId) -> &IntervalSet {
        &self.videos[video.index()].presenters
    }

    pub fn commercials(&self, video: VideoId) -> &CommercialOutcome {
        &self.videos[video.index()].commercials
    }

    /// Video minus commercials, or `None` when commercials could not be detected.
    pub fn news_content(&self, video: VideoId) -> Option<&IntervalSet> {
        self.videos[video.index()].news.as_ref()
    }

    pub fn full_video(&self, video: VideoId) -> IntervalSet {
        IntervalSet::span(video, 0, self.records.videos[video.index()].duration)
    }

    /// Videos whose captions are missing, so commercials are unknown.
    pub fn videos_without_captions(&self) -> impl Iterator<Item = VideoId> + '_ {
        self.video_ids().filter(|&v| self.news_content(v).is_none())
    }

    /// Intervals where at least `min_count` face detections are active at once.
    pub fn face_presence(&self, video: VideoId, min_count: usize) -> Result<IntervalSet, ArchiveError> {
        if video.index() >= self.video_count() {
            return Err(ArchiveError::UnknownVideo(alloc::format!("{video}")));
        }
        if min_count == 0 {
            return Err(ArchiveError::Config("min_count must be at least 1"));
        }
        let period = self.config.sample_period;
        let mut events: Vec<(TimePoint, i32)> = Vec::with_capacity(self.faces(video).len() * 2);
        for f in self.faces(video) {
            events.push((f.t, 1));
            events.push((f.t.saturating_add(period), -1));
        }
        // Ends sort before starts at the same instant (half-open).
        events.sort_unstable_by_key(|&(t, delta)| (t, delta));
        let mut out = Vec::new();
        let mut active = 0i64;
        let mut open: Option<TimePoint> = None;
        for (t, delta) in events {
            active += i64::from(delta);
            let on = active >= min_count as i64;
            match (open, on) {
                (None, true) => open = Some(t),
                (Some(s), false) => {
                    if t > s {
                        out.push(Interval::new(s, t));
                    }
                    open = None;
                }
                _ => {}
            }
        }
        Ok(IntervalSet::from_sorted_unchecked(video, out).canonicalize())
    }

    /// Occurrences of a token phrase (case-insensitive, adjacent by `seq`
    /// order), via the inverted index.
    pub fn find_phrase(&self, phrase: &[&str]) -> Vec<PhraseMatch> {
        let Some(terms) = self.phrase_terms(phrase) else { return Vec::new() };
        self.find_term_phrase(&terms)
    }

    /// Resolves a phrase to term ids; `None` if a word never occurs.
    pub fn phrase_terms(&self, phrase: &[&str]) -> Option<Vec<TermId>> {
        if phrase.is_empty() {
            return None;
        }
        phrase.iter().map(|w| self.term_id(w)).collect()
    }

    pub fn find_term_phrase(&self, terms: &[TermId]) -> Vec<PhraseMatch> {
        let Some((&first, rest)) = terms.split_first() else { return Vec::new() };
        let n = terms.len() as u32;
        self.postings(first)
            .iter()
            .filter(|&&(video, pos)| {
                let tokens = self.tokens(video);
                (pos as usize + rest.len()) < tokens.len()
                    && rest
                        .iter()
                        .enumerate()
                        .all(|(k, &term)| self.term_of(tokens[pos as usize + 1 + k].word) == term)
            })
            .map(|&(video, pos)| PhraseMatch { video, first: pos, last: pos + n - 1 })
            .collect()
    }

    /// Phrase occurrences within one video.
    pub fn find_term_phrase_in(&self, video: VideoId, terms: &[TermId]) -> Vec<PhraseMatch> {
        let Some(&first) = terms.first() else { return Vec::new() };
        let postings = self.postings(first);
        let lo = postings.partition_point(|&(v, _)| v < video);
        let hi = postings.partition_point(|&(v, _)| v <= video);
        let tokens = self.tokens(video);
        let n = terms.len() as u32;
        postings[lo..hi]
            .iter()
            .filter(|&&(_, pos)| {
                (pos as usize + terms.len()) <= tokens.len()
                    && terms[1..]
                        .iter()
                        .enumerate()
                        .all(|(k, &term)| self.term_of(tokens[pos as usize + 1 + k].word) == term)
            })
            .map(|&(video, pos)| PhraseMatch { video, first: pos, last: pos + n - 1 })
            .collect()
    }

    /// Temporal extent of a match: first token's start to last token's end.
    pub fn match_extent(&self, m: &PhraseMatch) -> Interval {
        let tokens = self.tokens(m.video);
        let first = tokens[m.first as usize];
        let last = tokens[m.last as usize];
        let end = last.t1.max(first.t0);
        detectors::token_extent(first.t0, end)
    }
}

fn build_terms(words: &[String]) -> (Vec<TermId>, Vec<String>, HashMap<String, TermId>) {
    let mut lookup: HashMap<String, TermId> = HashMap::new();
    let mut terms = Vec::new();
    let word_term = words
        .iter()
        .map(|w| {
            let upper = w.to_uppercase();
            *lookup.entry(upper.clone()).or_insert_with(|| {
                terms.push(upper);
                TermId(terms.len() as u32 - 1)
            })
        })
        .collect();
    (word_term, terms, lookup)
}

fn build_postings(tokens: &[Vec<Token>], word_term: &[TermId], n_terms: usize) -> (Vec<usize>, Vec<(VideoId, u32)>) {
    let mut offsets = vec![0usize; n_terms + 1];
    for t in tokens.iter().flatten() {
        offsets[word_term[t.word.0 as usize].index() + 1] += 1;
    }
    for i in 0..n_terms {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut postings = vec![(VideoId(0), 0u32); offsets[n_terms]];
    for (v, video_tokens) in tokens.iter().enumerate() {
        for (pos, t) in video_tokens.iter().enumerate() {
            let slot = &mut fill[word_term[t.word.0 as usize].index()];
            postings[*slot] = (VideoId(v as u32), pos as u32);
            *slot += 1;
        }
    }
    (offsets, postings)
}

#[allow(clippy::too_many_arguments)]
fn index_video(
    video: VideoId,
    meta: &VideoMeta,
    faces: &[FaceEvent],
    face_range: core::ops::Range<usize>,
    tokens: &[Token],
    luminance: &[LuminanceSample],
    word_flags: &[(bool, bool)],
    persons: &[Person],
    config: &ArchiveConfig,
) -> VideoIndex {
    let period = config.sample_period;
    let expand = |f: &FaceEvent| Interval::new(f.t, f.t.saturating_add(period));

    let mut gender: [Vec<Interval>; 2] = [Vec::new(), Vec::new()];
    let mut by_person: Vec<(PersonId, Interval)> = Vec::new();
    for f in faces {
        gender[f.gender.slot()].push(expand(f));
        if let Some(label) = f.identity {
            by_person.push((label.person, expand(f)));
        }
    }
    let [male, female] = gender;
    // Faces are sorted by t, so each list is already start-sorted.
    let gender = [
        IntervalSet::from_sorted_unchecked(video, male).canonicalize(),
        IntervalSet::from_sorted_unchecked(video, female).canonicalize(),
    ];
    by_person.sort_by_key(|&(p, iv)| (p, iv.start));
    let mut identities: Vec<(PersonId, IntervalSet)> = Vec::new();
    for chunk in by_person.chunk_by(|a, b| a.0 == b.0) {
        let set = IntervalSet::from_sorted_unchecked(video, chunk.iter().map(|&(_, iv)| iv).collect()).canonicalize();
        identities.push((chunk[0].0, set));
    }

    let mut presenters = IntervalSet::empty(video);
    for (p, set) in &identities {
        if persons[p.index()].presents_on(&meta.channel) {
            presenters = presenters.union(set).expect("same video");
        }
    }

    let captions: Vec<CaptionSpan> = tokens
        .iter()
        .map(|t| {
            let (has_arrows, has_lowercase) = word_flags[t.word.0 as usize];
            CaptionSpan { t0: t.t0, t1: t.t1, has_arrows, has_lowercase }
        })
        .collect();
    let commercials =
        detectors::detect_commercials(video, meta.duration, &captions, luminance, &config.commercials)
            .expect("parameters validated before indexing");
    let news = commercials
        .mask()
        .map(|mask| IntervalSet::span(video, 0, meta.duration).minus(mask).expect("same video"));

    VideoIndex { faces: face_range, gender, identities, presenters, commercials, news }
}
