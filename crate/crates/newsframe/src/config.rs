//! Service configuration: one TOML file, with `NEWSFRAME_PORT` and
//! `NEWSFRAME_DATA_DIR` overriding the port and data directory.
//!
//! ```toml
//! data_dir = "data"
//! snapshot = "data/archive.snapshot"   # default: <data_dir>/archive.snapshot
//! sample_period_ms = 3000
//! bind = "127.0.0.1"
//! port = 8080
//! bucket = "month"                     # day | week | month | year
//! normalize = false
//!
//! [clock]
//! kind = "us_eastern"                  # or: kind = "fixed", offset_minutes = -300
//!
//! [commercials]
//! black_threshold = 0.01
//! final_max_len = 300000
//!
//! [interviews]
//! min_duration = 240000
//! ```

use std::path::{Path, PathBuf};

use newsframe_core::detectors::{CommercialParams, InterviewParams};
use newsframe_core::time::{BucketUnit, LocalClock};
use newsframe_core::ArchiveConfig;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::service::Defaults;

pub const ENV_PORT: &str = "NEWSFRAME_PORT";
pub const ENV_DATA_DIR: &str = "NEWSFRAME_DATA_DIR";
pub const SNAPSHOT_FILE: &str = "archive.snapshot";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub snapshot: Option<PathBuf>,
    pub sample_period_ms: u32,
    pub commercials: CommercialParams,
    pub interviews: InterviewParams,
    pub clock: LocalClock,
    pub bind: String,
    pub port: u16,
    pub bucket: BucketUnit,
    pub normalize: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: PathBuf::from("data"),
            snapshot: None,
            sample_period_ms: 3_000,
            commercials: CommercialParams::default(),
            interviews: InterviewParams::default(),
            clock: LocalClock::default(),
            bind: "127.0.0.1".into(),
            port: 8080,
            bucket: BucketUnit::Month,
            normalize: false,
        }
    }
}

impl ServiceConfig {
    /// Reads `path` (defaults when `None`) and applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.into(), source })?;
                toml::from_str(&text).map_err(|source| ConfigError::Parse { path: p.into(), source })?
            }
            None => ServiceConfig::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(port) = get(ENV_PORT) {
            self.port = port
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{ENV_PORT}={port:?} is not a port number")))?;
        }
        if let Some(dir) = get(ENV_DATA_DIR) {
            self.data_dir = PathBuf::from(dir);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sample_period_ms == 0 {
            return Err(ConfigError::Invalid("sample_period_ms must be positive".into()));
        }
        self.commercials.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.interviews.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn archive_config(&self) -> ArchiveConfig {
        ArchiveConfig { sample_period: self.sample_period_ms, commercials: self.commercials, clock: self.clock }
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.snapshot.clone().unwrap_or_else(|| self.data_dir.join(SNAPSHOT_FILE))
    }

    pub fn defaults(&self) -> Defaults {
        Defaults { bucket: self.bucket, normalize: self.normalize }
    }
}
