//! Latency on a 5 M face, 50 M token archive.

use std::time::Instant;

use newsframe::service::{run_query, Defaults, QueryLine, QueryRequest};
use newsframe::synth::{self, ArchiveSink, SynthConfig};
use newsframe_core::{Archive, ArchiveConfig};

use crate::{heavy, Report};

const TOKENS: u64 = 50_000_000;
const FACES: u64 = 5_000_000;
const RUNS: usize = 5;

/// Median wall time of a query over several runs, in milliseconds.
fn median_ms(a: &Archive, query: &str) -> (f64, f64) {
    let req = QueryRequest { queries: vec![QueryLine { query: query.into(), color: None }], ..Default::default() };
    let mut times = Vec::new();
    let mut seconds = 0.0;
    for _ in 0..RUNS {
        let t = Instant::now();
        let resp = run_query(a, &req, Defaults::default()).unwrap();
        times.push(t.elapsed().as_secs_f64() * 1e3);
        seconds = resp.series[0].total_seconds;
    }
    times.sort_by(f64::total_cmp);
    (times[RUNS / 2], seconds)
}

#[test]
fn interactive_latency() {
    let _guard = heavy();
    let mut report = Report::new("performance");
    let mut sink = ArchiveSink::new();
    let truth = synth::generate(&SynthConfig::performance(3, TOKENS, FACES), &mut sink).unwrap();
    report.note(format!("generated {} videos, {} tokens, {} faces in {:.1} s", truth.videos, truth.tokens, truth.faces, report.elapsed_secs()));
    report.check(truth.tokens >= TOKENS && truth.faces >= FACES, "archive meets the 50 M token / 5 M face size");

    let t = Instant::now();
    let a = sink.finish(ArchiveConfig::default()).unwrap();
    let build = t.elapsed().as_secs_f64();
    report.check(build < 60.0, format!("cold index build {build:.2} s < 60 s"));

    for q in [r#"tag="female""#, r#"text="ECONOMY""#, r#"channel="CNN""#] {
        let (ms, secs) = median_ms(&a, q);
        report.check(ms < 200.0 && secs > 0.0, format!("single filter {q}: median {ms:.1} ms < 200 ms ({secs:.0} s matched)"));
    }
    let and = r#"tag="female" AND text="ECONOMY" AND channel="CNN""#;
    let (ms, secs) = median_ms(&a, and);
    report.check(ms < 500.0 && secs > 0.0, format!("3-leaf AND {and}: median {ms:.1} ms < 500 ms ({secs:.0} s matched)"));
    report.finish();
}
