//! One test per acceptance criterion. Each prints its checks and a
//! `PASS`/`FAIL` line to stderr (bypassing the test harness's capture, so the
//! lines show up in plain `cargo test` output) and then asserts.

mod analytics;
mod commercials;
mod intervals;
mod interviews;
mod labels;
mod mentions;
mod parity;
mod performance;
mod query;

use std::fmt::Write as _;
use std::io::Write as _;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

static HEAVY: Mutex<()> = Mutex::new(());

/// Tests that build large archives take turns, so peak memory stays that of one.
pub fn heavy() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub struct Report {
    name: &'static str,
    lines: Vec<(bool, String)>,
    notes: Vec<String>,
    started: Instant,
}

impl Report {
    pub fn new(name: &'static str) -> Self {
        Report { name, lines: Vec::new(), notes: Vec::new(), started: Instant::now() }
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) -> bool {
        self.lines.push((ok, what.into()));
        ok
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    /// Prints the report and fails the test if any check failed.
    pub fn finish(self) {
        let passed = self.lines.iter().all(|(ok, _)| *ok) && !self.lines.is_empty();
        let mut out = String::new();
        for (ok, what) in &self.lines {
            let _ = writeln!(out, "    [{}] {what}", if *ok { "ok" } else { "FAIL" });
        }
        for n in &self.notes {
            let _ = writeln!(out, "    note: {n}");
        }
        let _ = writeln!(
            out,
            "{} {} ({:.1} s)",
            if passed { "PASS" } else { "FAIL" },
            self.name,
            self.started.elapsed().as_secs_f64()
        );
        let _ = std::io::stderr().lock().write_all(out.as_bytes());
        let failed: Vec<&str> = self.lines.iter().filter(|(ok, _)| !ok).map(|(_, w)| w.as_str()).collect();
        assert!(passed, "{}: failed checks: {failed:?}", self.name);
    }
}

pub fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}
