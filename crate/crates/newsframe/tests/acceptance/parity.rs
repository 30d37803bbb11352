//! The CLI and the HTTP API return byte-identical series.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use newsframe::config::ServiceConfig;
use newsframe::http::{router, AppState};
use newsframe::snapshot;
use tower::ServiceExt;

use crate::Report;

const BIN: &str = env!("CARGO_BIN_EXE_newsframe");

/// Queries, bucket and normalization.
const GOLDEN: [(&[&str], Option<&str>, bool); 20] = [
    (&[r#"tag="female""#], None, false),
    (&[r#"tag="male""#], Some("day"), false),
    (&[r#"tag="presenter""#], Some("week"), true),
    (&[r#"tag="female" AND tag="presenter""#], Some("month"), true),
    (&[r#"name="Alan Brooks""#], Some("day"), false),
    (&[r#"name="Morgan Vance" OR name="Alan Brooks""#], None, true),
    (&[r#"text="SKYLARK""#], Some("day"), false),
    (&[r#"text="EMAILS" AND textwindow="10""#], Some("day"), true),
    (&[r#"text="FRANKLY" AND tag="male""#], Some("year"), false),
    (&[r#"channel="CNN""#], Some("day"), true),
    (&[r#"channel="FOX" AND commercials="include""#], Some("day"), false),
    (&[r#"show="Morning Desk""#], Some("week"), false),
    (&[r#"hour="6-12""#], Some("day"), false),
    (&[r#"hour="22-2" AND tag="female""#], Some("day"), true),
    (&[r#"(tag="male" OR tag="female") AND channel="CNN""#], Some("month"), false),
    (&[r#"tag="female" AND text="ECONOMY" AND channel="CNN""#], Some("day"), false),
    (&[r#"commercials="include""#], Some("day"), false),
    (&[r#"name="Nobody At All""#], None, false),
    (&[r#"tag="female""#, r#"tag="male""#], Some("week"), true),
    (&[r#"channel="cnn""#, r#"channel="FOX""#, r#"text="SKYLARK" AND commercials="include""#], Some("day"), false),
];

fn cli(snapshot: &Path, queries: &[&str], bucket: Option<&str>, normalize: bool) -> Vec<u8> {
    let mut cmd = Command::new(BIN);
    cmd.arg("query").args(queries).arg("--snapshot").arg(snapshot).args(["--format", "json"]);
    if let Some(b) = bucket {
        cmd.args(["--bucket", b]);
    }
    if normalize {
        cmd.arg("--normalize");
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "cli failed: {}", String::from_utf8_lossy(&out.stderr));
    let mut body = out.stdout;
    assert_eq!(body.pop(), Some(b'\n'));
    body
}

async fn http(state: Arc<AppState>, queries: &[&str], bucket: Option<&str>, normalize: bool) -> (StatusCode, Vec<u8>) {
    let mut req = serde_json::json!({
        "queries": queries.iter().map(|q| serde_json::json!({ "query": q })).collect::<Vec<_>>(),
    });
    if let Some(b) = bucket {
        req["bucket"] = b.into();
    }
    if normalize {
        req["normalize"] = true.into();
    }
    let request = Request::post("/api/query")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(req.to_string()))
        .unwrap();
    let resp = router(state).oneshot(request).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

#[tokio::test]
async fn cli_http_parity() {
    let mut report = Report::new("cli/http parity");
    let dir = std::env::temp_dir().join(format!("newsframe-parity-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let run = |args: &[&str]| {
        let out = Command::new(BIN).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    let d = dir.to_str().unwrap();
    run(&["synth", "--out", d, "--preset", "small", "--seed", "5"]);
    run(&["ingest", d]);
    let snap_path = dir.join(newsframe::config::SNAPSHOT_FILE);

    let config = ServiceConfig::load(None).unwrap();
    let state = Arc::new(AppState::new(snapshot::load(&snap_path).unwrap(), config.defaults()));
    let (mut identical, mut non_trivial) = (0, 0);
    for (queries, bucket, normalize) in GOLDEN {
        let from_cli = cli(&snap_path, queries, bucket, normalize);
        let (status, from_http) = http(Arc::clone(&state), queries, bucket, normalize).await;
        let same = status == StatusCode::OK && from_cli == from_http;
        identical += usize::from(same);
        let parsed: serde_json::Value = serde_json::from_slice(&from_cli).unwrap();
        non_trivial += usize::from(parsed["series"].as_array().unwrap().iter().any(|s| s["total_seconds"].as_f64() > Some(0.0)));
        if !same {
            report.note(format!("differs: {queries:?} bucket {bucket:?} normalize {normalize}"));
        }
    }
    report.check(identical == GOLDEN.len(), format!("{identical}/{} golden queries byte-identical", GOLDEN.len()));
    report.check(non_trivial >= 15, format!("{non_trivial} golden queries match time"));
    let _ = std::fs::remove_dir_all(&dir);
    report.finish();
}
