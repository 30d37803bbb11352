//! Snapshot files: the validated records plus build configuration, encoded
//! with bincode. Indexes are rebuilt on load. The configuration travels as
//! embedded JSON because its tagged enums are not self-describing in bincode.

use std::fs::File;
use std::hash::{DefaultHasher, Hasher};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use newsframe_core::archive::Records;
use newsframe_core::{Archive, ArchiveConfig};
use serde::{Deserialize, Serialize};

use crate::error::SnapshotError;

const MAGIC: [u8; 8] = *b"NWSFRAME";
const VERSION: u32 = 1;

#[derive(Serialize)]
struct Borrowed<'a> {
    magic: [u8; 8],
    version: u32,
    config: String,
    records: &'a Records,
}

#[derive(Deserialize)]
struct Owned {
    magic: [u8; 8],
    version: u32,
    config: String,
    records: Records,
}

/// A loaded archive with the identity of the bytes it came from.
#[derive(Debug)]
pub struct Snapshot {
    pub archive: Archive,
    /// Hex digest of the snapshot bytes.
    pub id: String,
}

pub fn encode(archive: &Archive) -> Vec<u8> {
    let value = Borrowed { magic: MAGIC, version: VERSION, config: serde_json::to_string(archive.config()).expect("config serializes"), records: archive.records() };
    bincode::serialize(&value).expect("archive records serialize")
}

pub fn digest(bytes: &[u8]) -> String {
    let mut h = DefaultHasher::new();
    h.write(bytes);
    format!("{:016x}", h.finish())
}

pub fn save(archive: &Archive, path: &Path) -> Result<String, SnapshotError> {
    let io = |source| SnapshotError::Io { path: path.to_path_buf(), source };
    let bytes = encode(archive);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(&bytes).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(digest(&bytes))
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Snapshot, SnapshotError> {
    let format = |reason: String| SnapshotError::Format { path: path.to_path_buf(), reason };
    let owned: Owned = bincode::deserialize(bytes).map_err(|e| format(e.to_string()))?;
    if owned.magic != MAGIC {
        return Err(format("bad magic".into()));
    }
    if owned.version != VERSION {
        return Err(format(format!("unsupported version {}", owned.version)));
    }
    let config: ArchiveConfig = serde_json::from_str(&owned.config).map_err(|e| format(e.to_string()))?;
    let archive = Archive::from_records(owned.records, config)?;
    Ok(Snapshot { archive, id: digest(bytes) })
}

pub fn load(path: &Path) -> Result<Snapshot, SnapshotError> {
    let io = |source| SnapshotError::Io { path: path.to_path_buf(), source };
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(io)?).read_to_end(&mut bytes).map_err(io)?;
    decode(&bytes, path)
}
