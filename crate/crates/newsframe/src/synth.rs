//! Seeded synthetic archives with a manifest of everything planted in them.
//!
//! Videos are laid out on fixed grids: caption tokens and luminance samples
//! every 500 ms, face samples every 3 s. A token occupies the first 400 ms of
//! its grid cell, so it never straddles two face samples and every planted
//! co-occurrence can be counted exactly by the generator itself.
//!
//! Output goes through a [`Sink`], either a [`Dataset`] (files) or an
//! [`ArchiveSink`] that feeds an [`ArchiveBuilder`] directly, which is what
//! very large archives need.

use std::collections::HashMap;

use chrono::{Datelike, Days, NaiveDate};
use newsframe_core::analytics::Event;
use newsframe_core::archive::{DescriptorStore, FaceEvent, IdentityLabel, Token, DESCRIPTOR_DIM};
use newsframe_core::detectors::LuminanceSample;
use newsframe_core::time::day_start_ms;
use newsframe_core::{Archive, ArchiveBuilder, ArchiveConfig, Gender, VideoId, VideoMeta};
use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::formats::{format_utc, Dataset, FaceRecord, LabelScore, LuminanceRecord, NameScore, PersonRow, TokenRecord, VideoRecord};

pub const GRID_MS: u32 = 500;
pub const TOKEN_MS: u32 = 400;
pub const SLOT_MS: u32 = 3_000;
const BLACK_MS: u32 = 1_000;
const TOKENS_PER_SLOT: u32 = SLOT_MS / GRID_MS;

pub const GENDER_WORD: &str = "SKYLARK";
pub const CATCHPHRASE: &str = "FRANKLY";
pub const PERSON_WORD: &str = "EMAILS";

const CHANNELS: [&str; 3] = ["CNN", "FOX", "MSNBC"];
const SHOWS: [[&str; 4]; 3] = [
    ["Morning Desk", "Newsroom", "The Lead Hour", "Tonight"],
    ["First Look", "America Live", "The Evening Edit", "Night Report"],
    ["Early Start", "Midday Brief", "Hardline", "Last Call"],
];
const HOSTS: [&str; 12] = [
    "Alan Brooks", "Victor Reyes", "Martin Cole", "Simon Ward", "Peter Lang", "Hugo Grant",
    "Oscar Pike", "Neil Foster", "Dean Carver", "Ralph Stone", "Glen Porter", "Ivan Marsh",
];
/// Per channel: blonde woman, brown-haired woman, man.
const CO_PRESENTERS: [[&str; 3]; 3] = [
    ["Laura Finch", "Nadia Ruiz", "Colin Shaw"],
    ["Tessa Lowe", "Maria Santos", "Derek Moss"],
    ["Julia Hart", "Elena Cruz", "Frank Doyle"],
];
pub const PERSON_OF_INTEREST: &str = "Morgan Vance";
const GUESTS: [(&str, Gender); 8] = [
    ("Ruth Allen", Gender::Female),
    ("Samuel Otto", Gender::Male),
    ("Karen Bishop", Gender::Female),
    ("Leon Price", Gender::Male),
    ("Anita Shah", Gender::Female),
    ("Boris Klein", Gender::Male),
    ("Clara Nunez", Gender::Female),
    ("David Ochoa", Gender::Male),
];

/// Uppercase caption vocabulary, most frequent first.
const FILLER: &[&str] = &[
    "THE", "TO", "AND", "OF", "A", "IN", "THAT", "IS", "YOU", "IT", "WE", "THIS", "FOR", "ON", "ARE", "HAVE",
    "WITH", "WAS", "BE", "NOT", "THEY", "WHAT", "HE", "AT", "ABOUT", "SO", "ALL", "BUT", "PEOPLE", "THERE",
    "ONE", "FROM", "THINK", "KNOW", "NOW", "GOING", "RIGHT", "JUST", "SAID", "PRESIDENT", "IF", "LIKE", "OUT",
    "CAN", "WILL", "UP", "THEIR", "AN", "DO", "WHO", "TIME", "GET", "SHE", "HAS", "MORE", "BY", "WERE", "BEEN",
    "WOULD", "TODAY", "NEWS", "SAY", "BECAUSE", "NIGHT", "WHEN", "COUNTRY", "OVER", "NEW", "YEAR", "HOUSE",
    "WEEK", "STATE", "AMERICA", "AMERICANS", "POLICE", "ECONOMY", "VOTERS", "CONGRESS", "SENATE", "CAMPAIGN",
    "WHITE", "LAW", "STORY", "REPORT", "OFFICIALS", "TONIGHT", "MORNING", "BREAKING", "WEATHER", "STORM",
    "FAMILY", "CHILDREN", "SCHOOL", "HEALTH", "CARE", "MONEY", "JOBS", "MARKET", "STOCKS", "TRADE", "DEAL",
    "ELECTION", "DEBATE", "POLL", "SUPPORT", "QUESTION", "ANSWER", "INVESTIGATION", "COURT", "JUDGE", "CASE",
    "WORLD", "CITY", "FIRE", "WATER", "CAR", "ROAD", "GOVERNMENT", "LEADERS", "MILITARY", "TROOPS", "WAR",
    "PEACE", "TALKS", "BORDER", "SECURITY", "BUDGET", "TAX", "PLAN", "BILL", "VOTE", "MAJORITY", "MINORITY",
    "PARTY", "DEMOCRATS", "REPUBLICANS", "GOVERNOR", "MAYOR", "WITNESS", "VIDEO", "PICTURES", "LIVE", "SCENE",
    "MOMENTS", "AGO", "LATER", "BACK", "AHEAD", "JOINING", "US", "THANK", "WELCOME", "GOOD", "EVENING",
];
/// Mixed-case advertising copy.
const AD_WORDS: &[&str] = &[
    "Save", "big", "today", "at", "your", "local", "dealer", "Ask", "doctor", "if", "it's", "right", "for", "you",
    "Call", "now", "Limited", "time", "offer", "the", "new", "Try", "it", "free", "Visit", "us", "online",
    "Side", "effects", "may", "include", "Get", "more", "with", "Plans", "start", "at", "just", "a", "month",
];
/// Lowercase-bearing words that occasionally show up in news captions.
const NEWS_NOISE: &[&str] = &["iPhone", "eBay", "YouTube", "McCain", "iPad"];

/// Draws uniformly from `lo..=hi` in units of `step` milliseconds.
fn grid_len(rng: &mut ChaCha8Rng, lo_ms: u32, hi_ms: u32, step: u32) -> u32 {
    rng.gen_range(lo_ms / step..=hi_ms / step) * step
}

/// Splits a running total into per-batch integer counts so the cumulative
/// count always equals `round(rate * cumulative basis)`, capped per batch.
#[derive(Clone, Copy, Debug)]
struct Quota {
    rate: f64,
    basis: f64,
    taken: u64,
}

impl Quota {
    fn new(rate: f64) -> Self {
        Quota { rate, basis: 0.0, taken: 0 }
    }

    fn take(&mut self, basis: f64, cap: usize) -> usize {
        self.basis += basis;
        let want = (self.basis * self.rate).round() as u64;
        let k = want.saturating_sub(self.taken).min(cap as u64);
        self.taken += k;
        k as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceMode {
    None,
    /// One face (or none) per sample: hosts, co-presenters, a person of interest, anonymous guests.
    Scenes,
    /// Host/guest interview episodes with decoys in between.
    Interviews,
}

/// Screen-time mix for [`FaceMode::Scenes`], as shares of news time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    /// Host of the first show of the first channel.
    pub target_host_rate: f64,
    pub other_host_rate: f64,
    pub person_rate: f64,
    /// Share of the remaining samples given to co-presenters.
    pub copresenter_rate: f64,
    pub female_copresenter_rate: f64,
    /// Share of female co-presenter time going to blonde presenters.
    pub blonde_rate: f64,
    /// Share of the still-remaining samples showing an anonymous face.
    pub guest_fill: f64,
    pub guest_female_rate: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            target_host_rate: 0.70,
            other_host_rate: 0.45,
            person_rate: 0.02,
            copresenter_rate: 0.35,
            female_copresenter_rate: 0.5,
            blonde_rate: 0.6,
            guest_fill: 0.6,
            guest_female_rate: 0.4,
        }
    }
}

/// Words and event mentions planted into [`FaceMode::Scenes`] archives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plants {
    pub gender_word: u64,
    /// Share of gender-word utterances said over a female face.
    pub gender_word_female: f64,
    pub catchphrase: u64,
    /// Share of catchphrase utterances said with the target host on screen.
    pub catchphrase_host: f64,
    pub person_word: u64,
    /// Share of person-word utterances said with the person of interest on screen.
    pub person_word_rate: f64,
    pub events: bool,
    pub event_peak: u64,
    pub event_decay: f64,
    pub event_window: u32,
}

impl Default for Plants {
    fn default() -> Self {
        Plants {
            gender_word: 10_000,
            gender_word_female: 0.8,
            catchphrase: 1_000,
            catchphrase_host: 0.6,
            person_word: 2_000,
            person_word_rate: 0.11,
            events: true,
            event_peak: 40,
            event_decay: 0.85,
            event_window: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub start: NaiveDate,
    pub days: u32,
    pub channels: usize,
    pub shows_per_channel: usize,
    pub video_ms: u32,
    pub commercials: bool,
    /// Caption dropouts and stray mixed-case words inside news.
    pub caption_noise: bool,
    pub faces: FaceMode,
    pub scenes: SceneParams,
    pub plants: Option<Plants>,
    pub descriptors: bool,
    /// Keep adding days until both totals are reached.
    pub min_tokens: u64,
    pub min_faces: u64,
}

pub const PRESETS: [&str; 5] = ["small", "commercials", "interviews", "analytics", "performance"];

impl SynthConfig {
    fn base(seed: u64) -> Self {
        SynthConfig {
            seed,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            days: 1,
            channels: 2,
            shows_per_channel: 2,
            video_ms: 3_600_000,
            commercials: true,
            caption_noise: true,
            faces: FaceMode::None,
            scenes: SceneParams::default(),
            plants: None,
            descriptors: false,
            min_tokens: 0,
            min_faces: 0,
        }
    }

    /// A few short videos with every record kind, for fixtures and demos.
    pub fn small(seed: u64) -> Self {
        SynthConfig {
            days: 3,
            video_ms: 1_200_000,
            faces: FaceMode::Scenes,
            plants: Some(Plants {
                gender_word: 120,
                catchphrase: 40,
                person_word: 60,
                events: false,
                ..Plants::default()
            }),
            descriptors: true,
            ..Self::base(seed)
        }
    }

    /// At least `hours` of one-hour videos with planted commercial breaks,
    /// in whole days of nine videos.
    pub fn commercials(seed: u64, hours: u32) -> Self {
        SynthConfig { days: hours.div_ceil(9).max(1), channels: 3, shows_per_channel: 3, ..Self::base(seed) }
    }

    pub fn interviews(seed: u64) -> Self {
        SynthConfig { days: 20, commercials: false, caption_noise: false, faces: FaceMode::Interviews, ..Self::base(seed) }
    }

    pub fn analytics(seed: u64) -> Self {
        SynthConfig { days: 120, faces: FaceMode::Scenes, plants: Some(Plants::default()), ..Self::base(seed) }
    }

    pub fn performance(seed: u64, min_tokens: u64, min_faces: u64) -> Self {
        SynthConfig {
            channels: 3,
            shows_per_channel: 4,
            caption_noise: false,
            faces: FaceMode::Scenes,
            min_tokens,
            min_faces,
            ..Self::base(seed)
        }
    }

    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        Some(match name {
            "small" => Self::small(seed),
            "commercials" => Self::commercials(seed, 225),
            "interviews" => Self::interviews(seed),
            "analytics" => Self::analytics(seed),
            "performance" => Self::performance(seed, 50_000_000, 5_000_000),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Infeasible(m.to_string()));
        if self.channels == 0 || self.channels > CHANNELS.len() {
            return bad("channels must be between 1 and 3");
        }
        if self.shows_per_channel == 0 || self.shows_per_channel > SHOWS[0].len() {
            return bad("shows_per_channel must be between 1 and 4");
        }
        let sc = &self.scenes;
        let mut rates = vec![
            sc.target_host_rate,
            sc.other_host_rate,
            sc.person_rate,
            sc.copresenter_rate,
            sc.female_copresenter_rate,
            sc.blonde_rate,
            sc.guest_fill,
            sc.guest_female_rate,
        ];
        if let Some(p) = &self.plants {
            rates.extend([p.gender_word_female, p.catchphrase_host, p.person_word_rate, p.event_decay]);
        }
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rates must lie in [0, 1]");
        }
        if sc.target_host_rate.max(sc.other_host_rate) + sc.person_rate > 1.0 {
            return bad("host and person screen time exceed the news time");
        }
        if !self.video_ms.is_multiple_of(GRID_MS) || self.video_ms < 600_000 || self.video_ms > 4 * 3_600_000 {
            return bad("video_ms must be a multiple of 500 between 10 minutes and 4 hours");
        }
        if self.commercials && self.faces == FaceMode::Interviews {
            return bad("interview archives are generated without commercials");
        }
        if self.plants.is_some() && (self.faces != FaceMode::Scenes || self.min_tokens > 0 || self.min_faces > 0) {
            return bad("plants need scene faces and a fixed number of days");
        }
        Ok(())
    }

    fn videos_per_day(&self) -> usize {
        self.channels * self.shows_per_channel
    }
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VideoSpans {
    pub video: String,
    pub spans: Vec<[u32; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedInterview {
    pub video: String,
    pub guest: String,
    pub host: String,
    pub start_ms: u32,
    pub end_ms: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantedWord {
    pub word: String,
    pub person: Option<String>,
    /// Intended share of utterances over a female face (gender word) or with the person on screen.
    pub target: f64,
    pub utterances: u64,
    pub female_hits: u64,
    pub male_hits: u64,
    pub person_hits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PersonBaseline {
    pub person: String,
    pub tokens: u64,
    pub tokens_with_person: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HostShare {
    pub show: String,
    pub host: String,
    pub target: f64,
    pub host_ms: u64,
    pub news_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HairShare {
    pub target: f64,
    pub blonde: Vec<String>,
    pub brown: Vec<String>,
    pub blonde_ms: u64,
    pub brown_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgeTruth {
    pub channel: String,
    /// First day of the month.
    pub bucket: NaiveDate,
    pub weighted_years: f64,
    pub millis: u64,
}

impl AgeTruth {
    pub fn mean_age(&self) -> f64 {
        self.weighted_years / self.millis as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub event: Event,
    /// Expected daily mentions, already cut at the next same-category event.
    pub daily: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    pub videos: u64,
    pub tokens: u64,
    pub faces: u64,
    pub news_ms: u64,
    /// Commercial breaks per video, from the first ad's start to the last ad's end.
    pub commercials: Vec<VideoSpans>,
    pub interviews: Vec<PlantedInterview>,
    /// Host/guest episodes too short to count, and guests shown without a host.
    pub decoys: Vec<PlantedInterview>,
    pub words: Vec<PlantedWord>,
    pub person_baseline: Option<PersonBaseline>,
    pub hosts: Vec<HostShare>,
    pub hair: Option<HairShare>,
    pub ages: Vec<AgeTruth>,
    pub female_face_ms: u64,
    pub face_ms: u64,
    pub events: Vec<PlantedEvent>,
}

impl Truth {
    pub fn word(&self, word: &str) -> Option<&PlantedWord> {
        self.words.iter().find(|w| w.word == word)
    }

    pub fn host(&self, show: &str) -> Option<&HostShare> {
        self.hosts.iter().find(|h| h.show == show)
    }
}

// ---------------------------------------------------------------------------
// Sinks

/// Receives generated records. Faces, tokens and luminance belong to the
/// most recent [`Sink::video`].
pub trait Sink {
    fn person(&mut self, row: PersonRow) -> Result<(), SynthError>;
    fn video(&mut self, video: VideoRecord) -> Result<(), SynthError>;
    fn face(&mut self, face: SynthFace<'_>) -> Result<(), SynthError>;
    fn token(&mut self, seq: u32, text: &str, t0: u32, t1: u32) -> Result<(), SynthError>;
    fn luminance(&mut self, t: u32, value: f32) -> Result<(), SynthError>;
    fn descriptors(&mut self, data: Vec<f32>) -> Result<(), SynthError>;
}

#[derive(Clone, Copy, Debug)]
pub struct SynthFace<'a> {
    pub t: u32,
    pub bbox: [f32; 4],
    pub gender: Gender,
    pub gender_score: f32,
    pub identity: Option<(&'a str, f32)>,
    pub descriptor: Option<u32>,
}

impl Sink for Dataset {
    fn person(&mut self, row: PersonRow) -> Result<(), SynthError> {
        self.persons.push(row);
        Ok(())
    }

    fn video(&mut self, video: VideoRecord) -> Result<(), SynthError> {
        self.videos.push(video);
        Ok(())
    }

    fn face(&mut self, f: SynthFace<'_>) -> Result<(), SynthError> {
        let video_id = self.videos.last().expect("face after video").id.clone();
        self.faces.push(FaceRecord {
            video_id,
            t_ms: f.t,
            bbox: f.bbox,
            gender: LabelScore { label: f.gender.as_str().into(), score: f.gender_score },
            identity: f.identity.map(|(name, score)| NameScore { name: name.into(), score }),
            descriptor_idx: f.descriptor,
        });
        Ok(())
    }

    fn token(&mut self, seq: u32, text: &str, t0: u32, t1: u32) -> Result<(), SynthError> {
        let video_id = self.videos.last().expect("token after video").id.clone();
        self.tokens.push(TokenRecord { video_id, seq, text: text.into(), t0_ms: t0, t1_ms: t1 });
        Ok(())
    }

    fn luminance(&mut self, t: u32, value: f32) -> Result<(), SynthError> {
        let video_id = self.videos.last().expect("sample after video").id.clone();
        self.luminance.push(LuminanceRecord { video_id, t_ms: t, value });
        Ok(())
    }

    fn descriptors(&mut self, data: Vec<f32>) -> Result<(), SynthError> {
        self.descriptors = data;
        Ok(())
    }
}

/// Builds an archive without materializing record files.
#[derive(Debug, Default)]
pub struct ArchiveSink {
    builder: ArchiveBuilder,
    current: Option<VideoId>,
}

impl ArchiveSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self, config: ArchiveConfig) -> Result<Archive, SynthError> {
        Ok(self.builder.build(config)?)
    }

    fn video_id(&self) -> VideoId {
        self.current.expect("record after video")
    }
}

impl Sink for ArchiveSink {
    fn person(&mut self, row: PersonRow) -> Result<(), SynthError> {
        let person = row.to_person().map_err(SynthError::Infeasible)?;
        self.builder.add_person(person)?;
        Ok(())
    }

    fn video(&mut self, v: VideoRecord) -> Result<(), SynthError> {
        let air_utc = crate::formats::parse_utc(&v.air_utc).map_err(SynthError::Infeasible)?;
        let meta = VideoMeta { name: v.id, channel: v.channel, show: v.show, air_utc, duration: v.duration_ms };
        self.current = Some(self.builder.add_video(meta)?);
        Ok(())
    }

    fn face(&mut self, f: SynthFace<'_>) -> Result<(), SynthError> {
        let identity = f.identity.map(|(name, score)| IdentityLabel { person: self.builder.person_or_register(name), score });
        let face = FaceEvent {
            video: self.video_id(),
            t: f.t,
            bbox: f.bbox,
            gender: f.gender,
            gender_score: f.gender_score,
            identity,
            descriptor: f.descriptor,
        };
        self.builder.add_face(face)?;
        Ok(())
    }

    fn token(&mut self, seq: u32, text: &str, t0: u32, t1: u32) -> Result<(), SynthError> {
        let word = self.builder.intern_word(text);
        self.builder.add_token(self.video_id(), Token { word, seq, t0, t1 })?;
        Ok(())
    }

    fn luminance(&mut self, t: u32, value: f32) -> Result<(), SynthError> {
        self.builder.add_luminance(self.video_id(), LuminanceSample { t, value })?;
        Ok(())
    }

    fn descriptors(&mut self, data: Vec<f32>) -> Result<(), SynthError> {
        self.builder.set_descriptors(DescriptorStore::new(data)?);
        Ok(())
    }
}

/// Generates the records as a [`Dataset`].
pub fn dataset(config: &SynthConfig) -> Result<(Dataset, Truth), SynthError> {
    let mut data = Dataset::default();
    let truth = generate(config, &mut data)?;
    Ok((data, truth))
}

/// Generates straight into an archive.
pub fn archive(config: &SynthConfig, archive_config: ArchiveConfig) -> Result<(Archive, Truth), SynthError> {
    let mut sink = ArchiveSink::new();
    let truth = generate(config, &mut sink)?;
    Ok((sink.finish(archive_config)?, truth))
}

// ---------------------------------------------------------------------------
// Generation

#[derive(Clone, Debug)]
struct PersonSpec {
    name: &'static str,
    gender: Gender,
    channel: Option<usize>,
    birth: Option<NaiveDate>,
    hair: Option<&'static str>,
}

type PersonIx = u16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Face {
    gender: Gender,
    person: Option<PersonIx>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Scene {
    faces: [Option<Face>; 2],
}

impl Scene {
    fn one(face: Face) -> Self {
        Scene { faces: [Some(face), None] }
    }

    fn two(a: Face, b: Face) -> Self {
        Scene { faces: [Some(a), Some(b)] }
    }

    fn iter(&self) -> impl Iterator<Item = Face> + '_ {
        self.faces.iter().flatten().copied()
    }

    fn has_person(&self, p: PersonIx) -> bool {
        self.iter().any(|f| f.person == Some(p))
    }

    fn has_gender(&self, g: Gender) -> bool {
        self.iter().any(|f| f.gender == g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Caption {
    Lower,
    Upper,
    Silent,
}

struct Layout {
    news: Vec<(u32, u32)>,
    /// Per break, its ads.
    breaks: Vec<Vec<(u32, u32, Caption)>>,
    black: Vec<(u32, u32)>,
}

struct Roster {
    people: Vec<PersonSpec>,
    /// `hosts[channel][show]`.
    hosts: Vec<Vec<PersonIx>>,
    /// Per channel: blonde, brown, male.
    co: Vec<[PersonIx; 3]>,
    person: PersonIx,
    guests: Vec<PersonIx>,
}

impl Roster {
    fn new(channels: usize, shows: usize) -> Self {
        let date = |y, m, d| NaiveDate::from_ymd_opt(y, m, d);
        let mut people = Vec::new();
        let mut push = |p: PersonSpec| {
            people.push(p);
            (people.len() - 1) as PersonIx
        };
        let mut hosts = Vec::new();
        let mut co = Vec::new();
        for c in 0..channels {
            let mut row = Vec::new();
            for s in 0..shows {
                let i = c * 4 + s;
                row.push(push(PersonSpec {
                    name: HOSTS[i],
                    gender: Gender::Male,
                    channel: Some(c),
                    birth: date(1948 + 3 * i as i32, 1 + (i as u32 * 5) % 12, 1 + (i as u32 * 7) % 28),
                    hair: None,
                }));
            }
            hosts.push(row);
            let [blonde, brown, man] = CO_PRESENTERS[c];
            co.push([
                push(PersonSpec { name: blonde, gender: Gender::Female, channel: Some(c), birth: date(1982 - c as i32, 4, 12), hair: Some("blonde") }),
                push(PersonSpec { name: brown, gender: Gender::Female, channel: Some(c), birth: date(1971 + c as i32, 9, 3), hair: Some("brown") }),
                push(PersonSpec { name: man, gender: Gender::Male, channel: Some(c), birth: date(1958 + 2 * c as i32, 2, 28), hair: Some("black") }),
            ]);
        }
        let person = push(PersonSpec { name: PERSON_OF_INTEREST, gender: Gender::Male, channel: None, birth: date(1947, 6, 14), hair: None });
        let guests = GUESTS
            .iter()
            .map(|&(name, gender)| push(PersonSpec { name, gender, channel: None, birth: None, hair: None }))
            .collect();
        Roster { people, hosts, co, person, guests }
    }

    fn row(&self, p: &PersonSpec) -> PersonRow {
        PersonRow {
            name: p.name.into(),
            presenter_channels: p.channel.map(|c| CHANNELS[c].to_string()).unwrap_or_default(),
            gender: p.gender.as_str().into(),
            birthdate: p.birth.map(|d| d.to_string()).unwrap_or_default(),
            hair_color: p.hair.unwrap_or("").into(),
        }
    }
}

/// Caption cells of one video: `None` is silence; `free` marks plain news
/// words that may be replaced by planted ones.
struct Grid {
    words: Vec<Option<&'static str>>,
    free: Vec<bool>,
}

impl Grid {
    fn cell(t: u32) -> usize {
        (t / GRID_MS) as usize
    }
}

struct Planted {
    word: &'static str,
    target: f64,
    person: Option<PersonIx>,
    utterances: u64,
    female: u64,
    male: u64,
    with_person: u64,
}

struct EventPlan {
    event: Event,
    day: u32,
    phrases: Vec<&'static [&'static str]>,
}

const TERROR_TERMS: [&[&str]; 2] = [&["BOMBING"], &["TERRORISM"]];
const CRASH_TERMS: [&[&str]; 1] = [&["PLANE", "CRASH"]];

struct Generator<'c, S: Sink> {
    cfg: &'c SynthConfig,
    rng: ChaCha8Rng,
    sink: &'c mut S,
    roster: Roster,
    filler: WeightedIndex<f64>,
    truth: Truth,
    host_quota: Vec<Quota>,
    host_ms: Vec<u64>,
    show_news_ms: Vec<u64>,
    person_quota: Quota,
    co_quota: Quota,
    co_female_quota: Quota,
    blonde_quota: Quota,
    guest_quota: Quota,
    guest_female_quota: Quota,
    plant_quotas: HashMap<&'static str, Quota>,
    planted: Vec<Planted>,
    events: Vec<EventPlan>,
    /// Per day and event index, mentions to plant.
    event_counts: HashMap<(u32, usize), u64>,
    ages: HashMap<(usize, NaiveDate), (f64, u64)>,
    hair_ms: [u64; 2],
    baseline: (u64, u64),
    centroids: Vec<Vec<f32>>,
    descriptors: Vec<f32>,
    noise: Normal<f32>,
}

/// Runs the generator into `sink`.
pub fn generate<S: Sink>(cfg: &SynthConfig, sink: &mut S) -> Result<Truth, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let roster = Roster::new(cfg.channels, cfg.shows_per_channel);
    let normal = Normal::new(0.0f32, 1.0).expect("valid normal");
    let centroids = if cfg.descriptors {
        roster.people.iter().map(|_| (0..DESCRIPTOR_DIM).map(|_| normal.sample(&mut rng)).collect()).collect()
    } else {
        Vec::new()
    };
    let filler = WeightedIndex::new((0..FILLER.len()).map(|r| 1.0 / (r as f64 + 2.0))).expect("positive weights");
    let sc = &cfg.scenes;
    let host_quota = (0..cfg.videos_per_day())
        .map(|i| Quota::new(if i == 0 { sc.target_host_rate } else { sc.other_host_rate }))
        .collect();
    let mut g = Generator {
        cfg,
        rng,
        sink,
        roster,
        filler,
        truth: Truth { seed: cfg.seed, ..Truth::default() },
        host_quota,
        host_ms: vec![0; cfg.videos_per_day()],
        show_news_ms: vec![0; cfg.videos_per_day()],
        person_quota: Quota::new(sc.person_rate),
        co_quota: Quota::new(sc.copresenter_rate),
        co_female_quota: Quota::new(sc.female_copresenter_rate),
        blonde_quota: Quota::new(sc.blonde_rate),
        guest_quota: Quota::new(sc.guest_fill),
        guest_female_quota: Quota::new(sc.guest_female_rate),
        plant_quotas: HashMap::new(),
        planted: Vec::new(),
        events: Vec::new(),
        event_counts: HashMap::new(),
        ages: HashMap::new(),
        hair_ms: [0; 2],
        baseline: (0, 0),
        centroids,
        descriptors: Vec::new(),
        noise: Normal::new(0.0, 0.05).expect("valid normal"),
    };
    g.run()?;
    Ok(g.truth)
}

impl<S: Sink> Generator<'_, S> {
    fn run(&mut self) -> Result<(), SynthError> {
        for p in &self.roster.people {
            self.sink.person(self.roster.row(p))?;
        }
        self.plan_plants();
        let mut day = 0u32;
        while day < self.cfg.days || self.truth.tokens < self.cfg.min_tokens || self.truth.faces < self.cfg.min_faces {
            self.day(day)?;
            day += 1;
        }
        if self.cfg.descriptors {
            let data = std::mem::take(&mut self.descriptors);
            self.sink.descriptors(data)?;
        }
        self.finish_truth();
        Ok(())
    }

    fn plan_plants(&mut self) {
        let Some(plants) = self.cfg.plants.clone() else { return };
        let videos = f64::from(self.cfg.days) * self.cfg.videos_per_day() as f64;
        let target_videos = f64::from(self.cfg.days);
        let host = self.roster.hosts[0][0];
        let person = self.roster.person;
        let mut q = |key: &'static str, rate: f64| {
            self.plant_quotas.insert(key, Quota::new(rate));
        };
        q("gender", plants.gender_word as f64 / videos);
        q("gender_female", plants.gender_word_female);
        q("catch_host", plants.catchphrase as f64 * plants.catchphrase_host / target_videos);
        q("catch_other", plants.catchphrase as f64 * (1.0 - plants.catchphrase_host) / videos);
        q("person", plants.person_word as f64 / videos);
        q("person_on", plants.person_word_rate);
        let planted = |word, target, person| Planted { word, target, person, utterances: 0, female: 0, male: 0, with_person: 0 };
        self.planted = vec![
            planted(GENDER_WORD, plants.gender_word_female, None),
            planted(CATCHPHRASE, plants.catchphrase_host, Some(host)),
            planted(PERSON_WORD, plants.person_word_rate, Some(person)),
        ];

        if plants.events {
            let days = self.cfg.days;
            let first = days / 12;
            let mut plan = vec![(first, "terrorism", "Harbor bombing", &TERROR_TERMS[..])];
            if first + 21 < days {
                plan.push((first + 21, "terrorism", "Station attack", &TERROR_TERMS[..]));
            }
            plan.push((days / 2, "plane_crash", "Flight 88 crash", &CRASH_TERMS[..]));
            for (i, &(day, category, name, terms)) in plan.iter().enumerate() {
                let date = self.cfg.start + Days::new(u64::from(day));
                let event = Event {
                    date,
                    category: category.into(),
                    name: name.into(),
                    terms: terms.iter().map(|t| t.join(" ")).collect(),
                };
                for k in 0..plants.event_window {
                    let n = (plants.event_peak as f64 * plants.event_decay.powi(k as i32)).round() as u64;
                    if n > 0 && day + k < days {
                        self.event_counts.insert((day + k, i), n);
                    }
                }
                self.events.push(EventPlan { event, day, phrases: terms.to_vec() });
            }
        }
    }

    fn day(&mut self, day: u32) -> Result<(), SynthError> {
        let date = self.cfg.start + Days::new(u64::from(day));
        let n = self.cfg.videos_per_day();
        // Event mentions for today, assigned to videos.
        let mut mentions: Vec<Vec<&'static [&'static str]>> = vec![Vec::new(); n];
        for (i, plan) in self.events.iter().enumerate() {
            let count = self.event_counts.get(&(day, i)).copied().unwrap_or(0);
            for _ in 0..count {
                let phrase = plan.phrases[self.rng.gen_range(0..plan.phrases.len())];
                mentions[self.rng.gen_range(0..n)].push(phrase);
            }
        }
        for c in 0..self.cfg.channels {
            for s in 0..self.cfg.shows_per_channel {
                let slot = c * self.cfg.shows_per_channel + s;
                self.video(date, c, s, std::mem::take(&mut mentions[slot]))?;
            }
        }
        Ok(())
    }

    fn video(&mut self, date: NaiveDate, channel: usize, show: usize, mentions: Vec<&'static [&'static str]>) -> Result<(), SynthError> {
        let duration = self.cfg.video_ms;
        let hour = 11 + 3 * show as i64 + channel as i64;
        let air = day_start_ms(date) + hour * 3_600_000;
        let show_name = SHOWS[channel][show];
        let id = format!(
            "{}_{:04}{:02}{:02}_{:02}0000_{}",
            CHANNELS[channel],
            date.year(),
            date.month(),
            date.day(),
            hour,
            show_name.replace(' ', "_")
        );
        self.sink.video(VideoRecord {
            id: id.clone(),
            channel: CHANNELS[channel].into(),
            show: show_name.into(),
            air_utc: format_utc(air),
            duration_ms: duration,
        })?;
        self.truth.videos += 1;

        let layout = self.layout(duration);
        if self.cfg.commercials {
            let spans = layout
                .breaks
                .iter()
                .map(|ads| [ads[0].0, ads[ads.len() - 1].1])
                .collect();
            self.truth.commercials.push(VideoSpans { video: id.clone(), spans });
        }
        let news_ms: u64 = layout.news.iter().map(|&(a, b)| u64::from(b - a)).sum();
        self.truth.news_ms += news_ms;
        self.show_news_ms[channel * self.cfg.shows_per_channel + show] += news_ms;

        let mut grid = self.captions(&layout, duration);
        let slots: Vec<u32> = layout
            .news
            .iter()
            .flat_map(|&(a, b)| (a..).step_by(SLOT_MS as usize).take_while(move |s| s + SLOT_MS <= b))
            .collect();
        let scenes = match self.cfg.faces {
            FaceMode::None => Vec::new(),
            FaceMode::Scenes => self.scenes(slots.len(), news_ms, channel, show),
            FaceMode::Interviews => self.interviews(&slots, channel, show, &id),
        };
        if self.cfg.plants.is_some() {
            self.plant_words(&mut grid, &slots, &scenes, channel == 0 && show == 0);
        }
        for phrase in mentions {
            self.plant_phrase(&mut grid, phrase);
        }

        self.tally_screen(&layout.news, &slots, &scenes, &grid, date, channel, show);
        self.emit_tokens(&grid)?;
        self.emit_faces(&slots, &scenes)?;
        self.emit_luminance(&layout, duration)
    }

    /// News segments of at least three minutes around commercial breaks of
    /// 60 to 240 s; every ad is preceded by a one-second black frame and the
    /// break is closed by another.
    fn layout(&mut self, duration: u32) -> Layout {
        let mut layout = Layout { news: Vec::new(), breaks: Vec::new(), black: Vec::new() };
        if !self.cfg.commercials {
            layout.news.push((0, duration));
            return layout;
        }
        let mut t = 0u32;
        loop {
            let news = grid_len(&mut self.rng, 360_000, 720_000, GRID_MS);
            let budget = grid_len(&mut self.rng, 60_000, 240_000, GRID_MS);
            let mut ads = Vec::new();
            let mut used = 0;
            loop {
                let len = grid_len(&mut self.rng, 15_000, 60_000, GRID_MS);
                let len = if ads.is_empty() { len.min(budget) } else { len };
                if used + len > budget {
                    break;
                }
                used += len;
                ads.push(len);
            }
            let break_total = used + BLACK_MS * (ads.len() as u32 + 1);
            if t + news + break_total + 180_000 > duration {
                layout.news.push((t, duration));
                return layout;
            }
            layout.news.push((t, t + news));
            t += news;
            let mut planned = Vec::new();
            for len in ads {
                layout.black.push((t, t + BLACK_MS));
                t += BLACK_MS;
                let caption = match self.rng.gen_range(0..10) {
                    0..=5 => Caption::Lower,
                    6 | 7 => Caption::Silent,
                    _ => Caption::Upper,
                };
                planned.push((t, t + len, caption));
                t += len;
            }
            layout.black.push((t, t + BLACK_MS));
            t += BLACK_MS;
            layout.breaks.push(planned);
        }
    }

    fn filler_word(&mut self) -> &'static str {
        FILLER[self.filler.sample(&mut self.rng)]
    }

    fn captions(&mut self, layout: &Layout, duration: u32) -> Grid {
        let cells = Grid::cell(duration);
        let mut grid = Grid { words: vec![None; cells], free: vec![false; cells] };
        let noise = self.cfg.caption_noise;
        for &(a, b) in &layout.news {
            let (first, last) = (Grid::cell(a), Grid::cell(b));
            let mut until_arrows = self.rng.gen_range(0..15);
            for cell in first..last {
                if until_arrows == 0 {
                    grid.words[cell] = Some(">>");
                    until_arrows = self.rng.gen_range(15..=20);
                    continue;
                }
                until_arrows -= 1;
                if noise && self.rng.gen_ratio(1, 1_500) {
                    grid.words[cell] = Some(NEWS_NOISE[self.rng.gen_range(0..NEWS_NOISE.len())]);
                } else {
                    grid.words[cell] = Some(self.filler_word());
                    grid.free[cell] = true;
                }
            }
            // Short caption dropouts, well under the no-caption threshold.
            if noise && last - first > 200 && self.rng.gen_bool(0.3) {
                let len = self.rng.gen_range(10..=40);
                let at = self.rng.gen_range(first + 20..last - len - 20);
                for cell in at..at + len {
                    grid.words[cell] = None;
                    grid.free[cell] = false;
                }
            }
        }
        for &(a, b, caption) in layout.breaks.iter().flatten() {
            for cell in Grid::cell(a)..Grid::cell(b) {
                grid.words[cell] = match caption {
                    Caption::Silent => None,
                    Caption::Lower => Some(AD_WORDS[self.rng.gen_range(0..AD_WORDS.len())]),
                    Caption::Upper => Some(self.filler_word()),
                };
            }
        }
        grid
    }

    fn scenes(&mut self, slots: usize, news_ms: u64, channel: usize, show: usize) -> Vec<Scene> {
        let mut scenes = vec![Scene::default(); slots];
        let mut order: Vec<usize> = (0..slots).collect();
        order.shuffle(&mut self.rng);
        let basis = news_ms as f64 / f64::from(SLOT_MS);
        let roster = &self.roster;
        let face = |p: PersonIx| Face { gender: roster.people[p as usize].gender, person: Some(p) };
        let mut rest = &order[..];
        let mut assign = |rest: &mut &[usize], k: usize, scene: Scene| {
            for &i in &rest[..k] {
                scenes[i] = scene;
            }
            *rest = &rest[k..];
        };

        let show_ix = channel * self.cfg.shows_per_channel + show;
        let k = self.host_quota[show_ix].take(basis, rest.len());
        assign(&mut rest, k, Scene::one(face(roster.hosts[channel][show])));
        let k = self.person_quota.take(basis, rest.len());
        assign(&mut rest, k, Scene::one(face(roster.person)));

        let k = self.co_quota.take(rest.len() as f64, rest.len());
        let female = self.co_female_quota.take(k as f64, k);
        let blonde = self.blonde_quota.take(female as f64, female);
        let [b, r, m] = roster.co[channel];
        assign(&mut rest, blonde, Scene::one(face(b)));
        assign(&mut rest, female - blonde, Scene::one(face(r)));
        assign(&mut rest, k - female, Scene::one(face(m)));

        let k = self.guest_quota.take(rest.len() as f64, rest.len());
        let female = self.guest_female_quota.take(k as f64, k);
        assign(&mut rest, female, Scene::one(Face { gender: Gender::Female, person: None }));
        assign(&mut rest, k - female, Scene::one(Face { gender: Gender::Male, person: None }));
        scenes
    }

    /// Episodes open with host and guest together, then alternate long
    /// guest-alone stretches with short host shots, ending on the guest.
    /// Decoys are either too short or never show the host.
    fn interviews(&mut self, slots: &[u32], channel: usize, show: usize, video: &str) -> Vec<Scene> {
        let n = slots.len();
        let host_ix = self.roster.hosts[channel][show];
        let host = Face { gender: Gender::Male, person: Some(host_ix) };
        let mut scenes = vec![Scene::default(); n];
        let mut i = self.rng.gen_range(40..=80);
        let fill_gap = |rng: &mut ChaCha8Rng, scenes: &mut [Scene], from: usize, to: usize| {
            for s in &mut scenes[from..to] {
                *s = match rng.gen_range(0..4) {
                    0 | 1 => Scene::one(host),
                    2 => Scene::one(Face { gender: if rng.gen_bool(0.5) { Gender::Female } else { Gender::Male }, person: None }),
                    _ => Scene::default(),
                };
            }
        };
        fill_gap(&mut self.rng, &mut scenes, 0, i.min(n));
        while i < n {
            let (guest_name, guest_gender) = GUESTS[self.rng.gen_range(0..GUESTS.len())];
            let guest_ix = self.roster.guests[GUESTS.iter().position(|g| g.0 == guest_name).expect("guest")];
            let guest = Face { gender: guest_gender, person: Some(guest_ix) };
            let kind = self.rng.gen_range(0..10);
            // (block kind, length in samples): 0 both, 1 guest alone, 2 host alone
            let mut blocks: Vec<(u8, usize)> = Vec::new();
            match kind {
                0..=6 => {
                    let target = self.rng.gen_range(100..=180);
                    let mut len = self.rng.gen_range(3..=10);
                    blocks.push((0, len));
                    loop {
                        let g = self.rng.gen_range(11..=20);
                        blocks.push((1, g));
                        len += g;
                        if len >= target {
                            break;
                        }
                        let h = self.rng.gen_range(1..=5);
                        blocks.push((2, h));
                        len += h;
                    }
                }
                7 | 8 => {
                    let (min, max) = (50, 70);
                    let mut len = self.rng.gen_range(3..=10);
                    blocks.push((0, len));
                    loop {
                        let g = self.rng.gen_range(11..=20).min(max - len);
                        if g < 11 {
                            break;
                        }
                        blocks.push((1, g));
                        len += g;
                        if len >= min {
                            break;
                        }
                        let h = self.rng.gen_range(1..=5).min(max - len);
                        blocks.push((2, h));
                        len += h;
                    }
                }
                _ => blocks.push((1, self.rng.gen_range(100..=180))),
            }
            let len: usize = blocks.iter().map(|b| b.1).sum();
            if i + len > n {
                fill_gap(&mut self.rng, &mut scenes, i, n);
                break;
            }
            let start = i;
            for (kind, k) in blocks {
                let scene = match kind {
                    0 => Scene::two(host, guest),
                    1 => Scene::one(guest),
                    _ => Scene::one(host),
                };
                scenes[i..i + k].fill(scene);
                i += k;
            }
            let planted = PlantedInterview {
                video: video.into(),
                guest: guest_name.into(),
                host: self.roster.people[host_ix as usize].name.into(),
                start_ms: slots[start],
                end_ms: slots[i - 1] + SLOT_MS,
            };
            if kind <= 6 {
                self.truth.interviews.push(planted);
            } else {
                self.truth.decoys.push(planted);
            }
            let gap = self.rng.gen_range(40..=80);
            fill_gap(&mut self.rng, &mut scenes, i, (i + gap).min(n));
            i += gap;
        }
        scenes
    }

    /// A random replaceable cell inside one of the chosen samples.
    fn pick_cell(&mut self, grid: &Grid, slots: &[u32], candidates: &[usize]) -> Option<(usize, usize)> {
        if candidates.is_empty() {
            return None;
        }
        for _ in 0..64 {
            let slot = candidates[self.rng.gen_range(0..candidates.len())];
            let cell = Grid::cell(slots[slot]) + self.rng.gen_range(0..TOKENS_PER_SLOT as usize);
            if grid.free[cell] {
                return Some((slot, cell));
            }
        }
        None
    }

    fn plant_words(&mut self, grid: &mut Grid, slots: &[u32], scenes: &[Scene], target_show: bool) {
        let host = self.roster.hosts[0][0];
        let person = self.roster.person;
        let matching = |pred: &dyn Fn(&Scene) -> bool| -> Vec<usize> {
            scenes.iter().enumerate().filter(|(_, s)| pred(s)).map(|(i, _)| i).collect()
        };
        let female = matching(&|s| s.has_gender(Gender::Female) && !s.has_gender(Gender::Male));
        let male = matching(&|s| s.has_gender(Gender::Male) && !s.has_gender(Gender::Female));
        let with_host = matching(&|s| s.has_person(host));
        let without_host = matching(&|s| !s.has_person(host));
        let with_person = matching(&|s| s.has_person(person));
        let without_person = matching(&|s| !s.has_person(person));

        let quota = |g: &mut Self, key: &str, basis: f64, cap: usize| g.plant_quotas.get_mut(key).expect("quota").take(basis, cap);
        let total = quota(self, "gender", 1.0, usize::MAX);
        let to_female = quota(self, "gender_female", total as f64, total);
        let mut jobs: Vec<(usize, &[usize], usize)> = vec![(0, &female, to_female), (0, &male, total - to_female)];
        if target_show {
            let n = quota(self, "catch_host", 1.0, usize::MAX);
            jobs.push((1, &with_host, n));
        }
        let n = quota(self, "catch_other", 1.0, usize::MAX);
        jobs.push((1, &without_host, n));
        let total = quota(self, "person", 1.0, usize::MAX);
        let on = quota(self, "person_on", total as f64, total);
        jobs.push((2, &with_person, on));
        jobs.push((2, &without_person, total - on));

        for (word_ix, candidates, count) in jobs {
            for _ in 0..count {
                let Some((slot, cell)) = self.pick_cell(grid, slots, candidates) else { break };
                let word = self.planted[word_ix].word;
                grid.words[cell] = Some(word);
                grid.free[cell] = false;
                let scene = scenes[slot];
                let p = &mut self.planted[word_ix];
                p.utterances += 1;
                p.female += u64::from(scene.has_gender(Gender::Female));
                p.male += u64::from(scene.has_gender(Gender::Male));
                p.with_person += u64::from(p.person.is_some_and(|who| scene.has_person(who)));
            }
        }
    }

    fn plant_phrase(&mut self, grid: &mut Grid, phrase: &[&'static str]) {
        let cells = grid.words.len();
        for _ in 0..10_000 {
            let at = self.rng.gen_range(0..cells.saturating_sub(phrase.len()).max(1));
            if (at..at + phrase.len()).all(|c| c < cells && grid.free[c]) {
                for (k, w) in phrase.iter().enumerate() {
                    grid.words[at + k] = Some(w);
                    grid.free[at + k] = false;
                }
                return;
            }
        }
        panic!("no room to plant {phrase:?}");
    }

    #[allow(clippy::too_many_arguments)]
    fn tally_screen(
        &mut self,
        news: &[(u32, u32)],
        slots: &[u32],
        scenes: &[Scene],
        grid: &Grid,
        date: NaiveDate,
        channel: usize,
        show: usize,
    ) {
        let bucket = date.with_day(1).expect("first of month");
        let person = self.roster.person;
        let host = self.roster.hosts[channel][show];
        for (slot, scene) in slots.iter().zip(scenes) {
            let ms = u64::from(SLOT_MS);
            for face in scene.iter() {
                self.truth.face_ms += ms;
                if face.gender == Gender::Female {
                    self.truth.female_face_ms += ms;
                }
                let Some(p) = face.person else { continue };
                let spec = &self.roster.people[p as usize];
                if p == host {
                    self.host_ms[channel * self.cfg.shows_per_channel + show] += ms;
                }
                if spec.channel == Some(channel) {
                    if let Some(birth) = spec.birth {
                        let e = self.ages.entry((channel, bucket)).or_default();
                        e.0 += age_oracle(birth, date) * ms as f64;
                        e.1 += ms;
                    }
                }
                match spec.hair {
                    Some("blonde") if spec.gender == Gender::Female => self.hair_ms[0] += ms,
                    Some("brown") if spec.gender == Gender::Female => self.hair_ms[1] += ms,
                    _ => {}
                }
            }
            if self.cfg.faces == FaceMode::Scenes {
                let first = Grid::cell(*slot);
                let n = (first..first + TOKENS_PER_SLOT as usize).filter(|&c| grid.words[c].is_some()).count() as u64;
                if scene.has_person(person) {
                    self.baseline.1 += n;
                }
            }
        }
        if self.cfg.faces == FaceMode::Scenes {
            // Every caption token inside news, ">>" included, is in the baseline's denominator.
            self.baseline.0 += news
                .iter()
                .flat_map(|&(a, b)| Grid::cell(a)..Grid::cell(b))
                .filter(|&c| grid.words[c].is_some())
                .count() as u64;
        }
    }

    fn emit_tokens(&mut self, grid: &Grid) -> Result<(), SynthError> {
        let mut seq = 0;
        for (cell, word) in grid.words.iter().enumerate() {
            if let Some(w) = word {
                let t0 = cell as u32 * GRID_MS;
                self.sink.token(seq, w, t0, t0 + TOKEN_MS)?;
                seq += 1;
            }
        }
        self.truth.tokens += u64::from(seq);
        Ok(())
    }

    fn emit_faces(&mut self, slots: &[u32], scenes: &[Scene]) -> Result<(), SynthError> {
        for (&t, scene) in slots.iter().zip(scenes) {
            for (k, face) in scene.iter().enumerate() {
                let x = 0.1 + 0.45 * k as f32;
                let bbox = [x, 0.2, x + 0.3, 0.7];
                let gender_score = 0.9 + 0.1 * self.rng.gen::<f32>();
                let identity = face.person.map(|p| (self.roster.people[p as usize].name, 0.9 + 0.1 * self.rng.gen::<f32>()));
                let descriptor = if self.cfg.descriptors {
                    let idx = (self.descriptors.len() / DESCRIPTOR_DIM) as u32;
                    match face.person {
                        Some(p) => {
                            for d in 0..DESCRIPTOR_DIM {
                                let v = self.centroids[p as usize][d] + self.noise.sample(&mut self.rng);
                                self.descriptors.push(v);
                            }
                        }
                        None => {
                            for _ in 0..DESCRIPTOR_DIM {
                                let v: f32 = self.rng.sample(rand_distr::StandardNormal);
                                self.descriptors.push(v);
                            }
                        }
                    }
                    Some(idx)
                } else {
                    None
                };
                self.sink.face(SynthFace { t, bbox, gender: face.gender, gender_score, identity, descriptor })?;
                self.truth.faces += 1;
            }
        }
        Ok(())
    }

    fn emit_luminance(&mut self, layout: &Layout, duration: u32) -> Result<(), SynthError> {
        let mut dark = vec![false; Grid::cell(duration)];
        for &(a, b) in &layout.black {
            for cell in Grid::cell(a)..Grid::cell(b) {
                dark[cell] = true;
            }
        }
        for (cell, &is_dark) in dark.iter().enumerate() {
            let value = if is_dark { self.rng.gen_range(0..5) as f32 / 1000.0 } else { self.rng.gen_range(200..800) as f32 / 1000.0 };
            self.sink.luminance(cell as u32 * GRID_MS, value)?;
        }
        Ok(())
    }

    fn finish_truth(&mut self) {
        let names = |g: &Self, p: PersonIx| g.roster.people[p as usize].name.to_string();
        for c in 0..self.cfg.channels {
            for s in 0..self.cfg.shows_per_channel {
                let ix = c * self.cfg.shows_per_channel + s;
                let target = if ix == 0 { self.cfg.scenes.target_host_rate } else { self.cfg.scenes.other_host_rate };
                self.truth.hosts.push(HostShare {
                    show: SHOWS[c][s].into(),
                    host: names(self, self.roster.hosts[c][s]),
                    target,
                    host_ms: self.host_ms[ix],
                    news_ms: self.show_news_ms[ix],
                });
            }
        }
        for w in &self.planted {
            self.truth.words.push(PlantedWord {
                word: w.word.into(),
                person: w.person.map(|p| names(self, p)),
                target: w.target,
                utterances: w.utterances,
                female_hits: w.female,
                male_hits: w.male,
                person_hits: w.with_person,
            });
        }
        if self.cfg.faces == FaceMode::Scenes {
            self.truth.person_baseline = Some(PersonBaseline {
                person: PERSON_OF_INTEREST.into(),
                tokens: self.baseline.0,
                tokens_with_person: self.baseline.1,
            });
            self.truth.hair = Some(HairShare {
                target: self.cfg.scenes.blonde_rate,
                blonde: self.roster.co.iter().map(|c| names(self, c[0])).collect(),
                brown: self.roster.co.iter().map(|c| names(self, c[1])).collect(),
                blonde_ms: self.hair_ms[0],
                brown_ms: self.hair_ms[1],
            });
        }
        let mut ages: Vec<AgeTruth> = self
            .ages
            .iter()
            .map(|(&(c, bucket), &(weighted_years, millis))| AgeTruth {
                channel: CHANNELS[c].into(),
                bucket,
                weighted_years,
                millis,
            })
            .collect();
        ages.sort_by(|a, b| (&a.channel, a.bucket).cmp(&(&b.channel, b.bucket)));
        self.truth.ages = ages;

        let window = self.cfg.plants.as_ref().map_or(0, |p| p.event_window);
        for plan in &self.events {
            let next = self
                .events
                .iter()
                .filter(|o| o.event.category == plan.event.category && o.day > plan.day)
                .map(|o| o.day)
                .min();
            let len = next.map_or(window, |d| (d - plan.day).min(window));
            // Same-category events share terms, so the tail of an earlier one counts here too.
            let daily = (0..len)
                .map(|k| {
                    (0..self.events.len())
                        .filter(|&j| self.events[j].event.category == plan.event.category)
                        .map(|j| self.event_counts.get(&(plan.day + k, j)).copied().unwrap_or(0))
                        .sum()
                })
                .collect();
            self.truth.events.push(PlantedEvent { event: plan.event.clone(), daily });
        }
    }
}

/// Age by elapsed days over the mean Gregorian year.
fn age_oracle(birth: NaiveDate, on: NaiveDate) -> f64 {
    (on - birth).num_days() as f64 / 365.2425
}
