//! IO, formats, HTTP service and synthetic data for the newsframe archive.

pub mod config;
pub mod error;
pub mod formats;
pub mod http;
pub mod lexicon;
pub mod service;
pub mod snapshot;
pub mod synth;
