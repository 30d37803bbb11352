//! On-disk record formats and ingestion into an [`Archive`].
//!
//! A data directory holds newline-delimited JSON for videos, faces, tokens and
//! luminance, a `persons.csv` registry, and optionally a raw descriptor store.
//! Missing files count as empty.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, SecondsFormat, TimeZone, Utc};
use newsframe_core::archive::{
    DescriptorStore, FaceEvent, HairColor, IdentityLabel, Person, Token, DESCRIPTOR_DIM,
};
use newsframe_core::detectors::LuminanceSample;
use newsframe_core::{Archive, ArchiveBuilder, ArchiveConfig, Gender, VideoMeta};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::IngestError;

pub const VIDEOS: &str = "videos.jsonl";
pub const FACES: &str = "faces.jsonl";
pub const TOKENS: &str = "tokens.jsonl";
pub const LUMINANCE: &str = "luminance.jsonl";
pub const PERSONS: &str = "persons.csv";
pub const DESCRIPTORS: &str = "descriptors.bin";
pub const DESCRIPTORS_META: &str = "descriptors.meta";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub channel: String,
    pub show: String,
    /// RFC 3339.
    pub air_utc: String,
    pub duration_ms: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub score: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NameScore {
    pub name: String,
    pub score: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub video_id: String,
    pub t_ms: u32,
    pub bbox: [f32; 4],
    pub gender: LabelScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<NameScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor_idx: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub video_id: String,
    pub seq: u32,
    pub text: String,
    pub t0_ms: u32,
    pub t1_ms: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LuminanceRecord {
    pub video_id: String,
    pub t_ms: u32,
    pub value: f32,
}

/// A `persons.csv` row. Channels are `;`-separated; empty cells mean unknown.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonRow {
    pub name: String,
    #[serde(default)]
    pub presenter_channels: String,
    #[serde(default)]
    pub gender: String,
    #[serde(default)]
    pub birthdate: String,
    #[serde(default)]
    pub hair_color: String,
}

/// A complete set of input records, as read from or written to a directory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub videos: Vec<VideoRecord>,
    pub persons: Vec<PersonRow>,
    pub faces: Vec<FaceRecord>,
    pub tokens: Vec<TokenRecord>,
    pub luminance: Vec<LuminanceRecord>,
    /// Flat, `DESCRIPTOR_DIM` floats per descriptor.
    pub descriptors: Vec<f32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub videos: usize,
    pub persons: usize,
    pub faces: usize,
    pub tokens: usize,
    pub luminance: usize,
    pub descriptors: usize,
    /// Videos the commercial detector cannot process; masked queries skip them.
    pub videos_without_captions: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn format_utc(ms: i64) -> String {
    Utc.timestamp_millis_opt(ms)
        .single()
        .expect("timestamp in range")
        .to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn parse_utc(s: &str) -> Result<i64, String> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.timestamp_millis())
        .map_err(|e| format!("invalid air_utc {s:?}: {e}"))
}

/// `YYYY-MM-DD`, or a bare year meaning January 1 of that year.
pub fn parse_birthdate(s: &str) -> Result<Option<NaiveDate>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
        let year: i32 = s.parse().expect("four digits");
        return Ok(NaiveDate::from_ymd_opt(year, 1, 1));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(Some)
        .map_err(|e| format!("invalid birthdate {s:?}: {e}"))
}

impl PersonRow {
    pub fn to_person(&self) -> Result<Person, String> {
        let name = self.name.trim();
        if name.is_empty() {
            return Err("person name is empty".into());
        }
        let gender = match self.gender.trim() {
            "" => None,
            g => Some(Gender::parse(g).ok_or_else(|| format!("invalid gender {g:?}"))?),
        };
        let hair = match self.hair_color.trim() {
            "" => None,
            h => Some(HairColor::parse(h).ok_or_else(|| format!("invalid hair color {h:?}"))?),
        };
        Ok(Person {
            name: name.to_string(),
            presenter_on: self
                .presenter_channels
                .split(';')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .map(String::from)
                .collect(),
            gender,
            birthdate: parse_birthdate(&self.birthdate)?,
            hair,
        })
    }
}

/// Feeds records into an [`ArchiveBuilder`], tagging failures with their
/// file and line.
struct Loader {
    builder: ArchiveBuilder,
    report: IngestReport,
    registered: BTreeSet<String>,
    labels_only: BTreeSet<String>,
}

fn at(file: &str, line: usize, message: impl Display) -> IngestError {
    IngestError::Record { file: file.to_string(), line, message: message.to_string() }
}

impl Loader {
    fn new() -> Self {
        Loader {
            builder: ArchiveBuilder::new(),
            report: IngestReport::default(),
            registered: BTreeSet::new(),
            labels_only: BTreeSet::new(),
        }
    }

    fn video(&mut self, rec: VideoRecord, line: usize) -> Result<(), IngestError> {
        let air_utc = parse_utc(&rec.air_utc).map_err(|m| at(VIDEOS, line, m))?;
        let meta = VideoMeta { name: rec.id, channel: rec.channel, show: rec.show, air_utc, duration: rec.duration_ms };
        self.builder.add_video(meta).map_err(|e| at(VIDEOS, line, e))?;
        self.report.videos += 1;
        Ok(())
    }

    fn person(&mut self, row: PersonRow, line: usize) -> Result<(), IngestError> {
        let person = row.to_person().map_err(|m| at(PERSONS, line, m))?;
        self.registered.insert(person.name.to_uppercase());
        self.builder.add_person(person).map_err(|e| at(PERSONS, line, e))?;
        self.report.persons += 1;
        Ok(())
    }

    fn face(&mut self, rec: FaceRecord, line: usize) -> Result<(), IngestError> {
        let video = self
            .builder
            .video_id(&rec.video_id)
            .ok_or_else(|| at(FACES, line, format!("unknown video {:?}", rec.video_id)))?;
        let gender = Gender::parse(&rec.gender.label)
            .ok_or_else(|| at(FACES, line, format!("invalid gender label {:?}", rec.gender.label)))?;
        let identity = match rec.identity {
            Some(id) => {
                let name = id.name.trim();
                if name.is_empty() {
                    return Err(at(FACES, line, "identity name is empty"));
                }
                self.labels_only.insert(name.to_string());
                Some(IdentityLabel { person: self.builder.person_or_register(name), score: id.score })
            }
            None => None,
        };
        let face = FaceEvent {
            video,
            t: rec.t_ms,
            bbox: rec.bbox,
            gender,
            gender_score: rec.gender.score,
            identity,
            descriptor: rec.descriptor_idx,
        };
        self.builder.add_face(face).map_err(|e| at(FACES, line, e))?;
        self.report.faces += 1;
        Ok(())
    }

    fn token(&mut self, rec: TokenRecord, line: usize) -> Result<(), IngestError> {
        let video = self
            .builder
            .video_id(&rec.video_id)
            .ok_or_else(|| at(TOKENS, line, format!("unknown video {:?}", rec.video_id)))?;
        let word = self.builder.intern_word(&rec.text);
        let token = Token { word, seq: rec.seq, t0: rec.t0_ms, t1: rec.t1_ms };
        self.builder.add_token(video, token).map_err(|e| at(TOKENS, line, e))?;
        self.report.tokens += 1;
        Ok(())
    }

    fn luminance(&mut self, rec: LuminanceRecord, line: usize) -> Result<(), IngestError> {
        let video = self
            .builder
            .video_id(&rec.video_id)
            .ok_or_else(|| at(LUMINANCE, line, format!("unknown video {:?}", rec.video_id)))?;
        let sample = LuminanceSample { t: rec.t_ms, value: rec.value };
        self.builder.add_luminance(video, sample).map_err(|e| at(LUMINANCE, line, e))?;
        self.report.luminance += 1;
        Ok(())
    }

    fn descriptors(&mut self, data: Vec<f32>) -> Result<(), IngestError> {
        let store = DescriptorStore::new(data)
            .map_err(|e| IngestError::File { file: DESCRIPTORS.into(), message: e.to_string() })?;
        self.report.descriptors = store.len();
        self.builder.set_descriptors(store);
        Ok(())
    }

    fn finish(mut self, config: ArchiveConfig) -> Result<(Archive, IngestReport), IngestError> {
        for name in &self.labels_only {
            if !self.registered.contains(&name.to_uppercase()) {
                self.report.warnings.push(format!("face label {name:?} is not in {PERSONS}; registered without attributes"));
            }
        }
        let archive = self.builder.build(config)?;
        self.report.videos_without_captions =
            archive.videos_without_captions().map(|v| archive.video(v).expect("video exists").name.clone()).collect();
        Ok((archive, self.report))
    }
}

fn for_each_json_line<T: DeserializeOwned>(
    dir: &Path,
    file: &str,
    mut visit: impl FnMut(T, usize) -> Result<(), IngestError>,
) -> Result<(), IngestError> {
    let path = dir.join(file);
    let handle = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(IngestError::io(path, e)),
    };
    for (i, line) in BufReader::new(handle).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| IngestError::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| at(file, line_no, e))?;
        visit(rec, line_no)?;
    }
    Ok(())
}

fn for_each_person(dir: &Path, mut visit: impl FnMut(PersonRow, usize) -> Result<(), IngestError>) -> Result<(), IngestError> {
    let path = dir.join(PERSONS);
    let handle = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(IngestError::io(path, e)),
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(handle);
    let headers = reader.headers().map_err(|e| at(PERSONS, 1, e))?.clone();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            at(PERSONS, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: PersonRow = record.deserialize(Some(&headers)).map_err(|e| at(PERSONS, line, e))?;
        visit(row, line)?;
    }
    Ok(())
}

fn read_descriptors(dir: &Path) -> Result<Option<Vec<f32>>, IngestError> {
    let bin = dir.join(DESCRIPTORS);
    let meta = dir.join(DESCRIPTORS_META);
    let bytes = match std::fs::read(&bin) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return if meta.exists() {
                Err(IngestError::File { file: DESCRIPTORS.into(), message: format!("missing, but {DESCRIPTORS_META} exists") })
            } else {
                Ok(None)
            };
        }
        Err(e) => return Err(IngestError::io(bin, e)),
    };
    let mut count = String::new();
    File::open(&meta)
        .and_then(|mut f| f.read_to_string(&mut count))
        .map_err(|e| IngestError::io(&meta, e))?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|e| at(DESCRIPTORS_META, 1, format!("invalid descriptor count: {e}")))?;
    let expected = count * DESCRIPTOR_DIM * 4;
    if bytes.len() != expected {
        return Err(IngestError::File {
            file: DESCRIPTORS.into(),
            message: format!("{} bytes, expected {expected} for {count} descriptors", bytes.len()),
        });
    }
    Ok(Some(bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes"))).collect()))
}

/// Reads, validates and indexes every record file in `dir`.
pub fn ingest_dir(dir: &Path, config: ArchiveConfig) -> Result<(Archive, IngestReport), IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let mut loader = Loader::new();
    for_each_json_line(dir, VIDEOS, |r, l| loader.video(r, l))?;
    for_each_person(dir, |r, l| loader.person(r, l))?;
    for_each_json_line(dir, FACES, |r, l| loader.face(r, l))?;
    for_each_json_line(dir, TOKENS, |r, l| loader.token(r, l))?;
    for_each_json_line(dir, LUMINANCE, |r, l| loader.luminance(r, l))?;
    if let Some(data) = read_descriptors(dir)? {
        loader.descriptors(data)?;
    }
    loader.finish(config)
}

impl Dataset {
    /// Builds the archive these records would produce if written and ingested.
    pub fn build(&self, config: ArchiveConfig) -> Result<(Archive, IngestReport), IngestError> {
        let mut loader = Loader::new();
        for (i, r) in self.videos.iter().enumerate() {
            loader.video(r.clone(), i + 1)?;
        }
        for (i, r) in self.persons.iter().enumerate() {
            loader.person(r.clone(), i + 2)?;
        }
        for (i, r) in self.faces.iter().enumerate() {
            loader.face(r.clone(), i + 1)?;
        }
        for (i, r) in self.tokens.iter().enumerate() {
            loader.token(r.clone(), i + 1)?;
        }
        for (i, r) in self.luminance.iter().enumerate() {
            loader.luminance(r.clone(), i + 1)?;
        }
        if !self.descriptors.is_empty() {
            loader.descriptors(self.descriptors.clone())?;
        }
        loader.finish(config)
    }

    /// Writes every record file (empty ones included) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), IngestError> {
        std::fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
        write_jsonl(dir, VIDEOS, &self.videos)?;
        write_jsonl(dir, FACES, &self.faces)?;
        write_jsonl(dir, TOKENS, &self.tokens)?;
        write_jsonl(dir, LUMINANCE, &self.luminance)?;

        let path = dir.join(PERSONS);
        let file = File::create(&path).map_err(|e| IngestError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        if self.persons.is_empty() {
            w.write_record(["name", "presenter_channels", "gender", "birthdate", "hair_color"])
                .map_err(|e| IngestError::File { file: PERSONS.into(), message: e.to_string() })?;
        }
        for row in &self.persons {
            w.serialize(row).map_err(|e| IngestError::File { file: PERSONS.into(), message: e.to_string() })?;
        }
        w.flush().map_err(|e| IngestError::io(&path, e))?;

        if !self.descriptors.is_empty() {
            let path = dir.join(DESCRIPTORS);
            let bytes: Vec<u8> = self.descriptors.iter().flat_map(|f| f.to_le_bytes()).collect();
            std::fs::write(&path, bytes).map_err(|e| IngestError::io(&path, e))?;
            let path = dir.join(DESCRIPTORS_META);
            let count = self.descriptors.len() / DESCRIPTOR_DIM;
            std::fs::write(&path, format!("{count}\n")).map_err(|e| IngestError::io(&path, e))?;
        }
        Ok(())
    }
}

fn write_jsonl<T: Serialize>(dir: &Path, file: &str, records: &[T]) -> Result<(), IngestError> {
    let path = dir.join(file);
    let handle = File::create(&path).map_err(|e| IngestError::io(&path, e))?;
    let mut w = BufWriter::new(handle);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| IngestError::File { file: file.into(), message: e.to_string() })?;
        w.write_all(b"\n").map_err(|e| IngestError::io(&path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(&path, e))
}
