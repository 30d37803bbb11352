use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use newsframe::config::ServiceConfig;
use newsframe::service::{self, DateRange, QueryLine, QueryRequest, ServiceError};
use newsframe::snapshot::{self, Snapshot};
use newsframe::synth::{self, SynthConfig, PRESETS};
use newsframe::{formats, http};
use newsframe_core::detectors::{self, CommercialOutcome};
use newsframe_core::time::BucketUnit;

/// Exit status for queries that fail to parse.
const EXIT_PARSE: u8 = 2;

#[derive(Parser)]
#[command(name = "newsframe", version, about = "Build, query and serve archives of annotated TV news")]
struct Cli {
    /// Service configuration (TOML). NEWSFRAME_PORT and NEWSFRAME_DATA_DIR override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a data directory and write an archive snapshot.
    Ingest {
        /// Directory holding videos.jsonl, persons.csv, faces.jsonl, tokens.jsonl, luminance.jsonl and optionally descriptors.bin.
        dir: PathBuf,
        /// Snapshot to write [default: <dir>/archive.snapshot].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate queries and print one series per query.
    Query {
        #[arg(required = true)]
        queries: Vec<String>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// day, week, month or year [default: from config].
        #[arg(long, value_parser = parse_bucket)]
        bucket: Option<BucketUnit>,
        /// Divide by each bucket's news-content time.
        #[arg(long)]
        normalize: bool,
        /// First UTC air date to include.
        #[arg(long)]
        from: Option<NaiveDate>,
        /// Last UTC air date to include.
        #[arg(long)]
        to: Option<NaiveDate>,
    },
    /// List clips matching a query, as JSON.
    Clips {
        query: String,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        page: usize,
        #[arg(long, default_value_t = 50)]
        page_size: usize,
    },
    /// Serve the HTTP API. SIGHUP reloads the snapshot.
    Serve {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Write a synthetic data directory and its truth.json manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "small", value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        preset: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override the preset's number of days.
        #[arg(long)]
        days: Option<u32>,
    },
    /// Print the detected commercial spans as CSV.
    DetectCommercials {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Only this video.
        #[arg(long)]
        video: Option<String>,
    },
    /// Print interviews of a guest by any of the hosts as CSV.
    DetectInterviews {
        #[arg(long)]
        guest: String,
        #[arg(long = "host", required = true)]
        hosts: Vec<String>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        video: Option<String>,
    },
}

fn parse_bucket(s: &str) -> Result<BucketUnit, String> {
    BucketUnit::parse(s).ok_or_else(|| format!("unknown bucket {s:?} (day, week, month, year)"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        // A closed pipe (`| head`) is not a failure.
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn open(config: &ServiceConfig, path: Option<PathBuf>) -> anyhow::Result<Snapshot> {
    let path = path.unwrap_or_else(|| config.snapshot_path());
    snapshot::load(&path).context("loading snapshot (run `newsframe ingest` first?)")
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = ServiceConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { dir, out } => ingest(&config, &dir, out),
        Command::Query { queries, snapshot, format, bucket, normalize, from, to } => {
            let snap = open(&config, snapshot)?;
            let req = QueryRequest {
                queries: queries.into_iter().map(|query| QueryLine { query, color: None }).collect(),
                bucket,
                normalize: normalize.then_some(true),
                date_range: Some(DateRange { from, to }),
            };
            match service::run_query(&snap.archive, &req, config.defaults()) {
                Ok(resp) => {
                    let mut out = io::stdout().lock();
                    match format {
                        Format::Csv => write!(out, "{}", service::to_csv(&resp))?,
                        Format::Json => writeln!(out, "{}", service::to_json(&resp))?,
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => query_error(&e),
            }
        }
        Command::Clips { query, snapshot, page, page_size } => {
            let snap = open(&config, snapshot)?;
            match service::run_clips(&snap.archive, &query, page, page_size, DateRange::default()) {
                Ok(resp) => {
                    println!("{}", serde_json::to_string_pretty(&resp)?);
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => query_error(&e),
            }
        }
        Command::Serve { snapshot, bind, port } => {
            let path = snapshot.unwrap_or_else(|| config.snapshot_path());
            let snap = snapshot::load(&path)?;
            eprintln!("loaded snapshot {} ({} videos)", snap.id, snap.archive.video_count());
            let addr = format!("{}:{}", bind.unwrap_or(config.bind.clone()), port.unwrap_or(config.port));
            let state = std::sync::Arc::new(http::AppState::new(snap, config.defaults()));
            let reload = move || match snapshot::load(&path) {
                Ok(s) => Some(s),
                Err(e) => {
                    eprintln!("reload failed, keeping current snapshot: {e}");
                    None
                }
            };
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(http::serve(state, &addr, reload))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { out, preset, seed, days } => {
            let mut cfg = SynthConfig::preset(&preset, seed).expect("preset validated by clap");
            if let Some(d) = days {
                cfg.days = d;
                cfg.min_tokens = 0;
                cfg.min_faces = 0;
            }
            let (data, truth) = synth::dataset(&cfg)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            data.write(&out)?;
            let truth_path = out.join("truth.json");
            std::fs::write(&truth_path, serde_json::to_string_pretty(&truth)?)
                .with_context(|| format!("writing {}", truth_path.display()))?;
            eprintln!(
                "wrote {} videos, {} faces, {} tokens to {}",
                data.videos.len(),
                data.faces.len(),
                data.tokens.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::DetectCommercials { snapshot, video } => {
            let snap = open(&config, snapshot)?;
            let a = &snap.archive;
            let mut out = io::stdout().lock();
            writeln!(out, "video,start_ms,end_ms")?;
            for id in selected(a, video.as_deref())? {
                let name = &a.video(id).expect("video exists").name;
                match a.commercials(id) {
                    CommercialOutcome::Unknown => eprintln!("{name}: no captions, commercials unknown"),
                    CommercialOutcome::Detected(set) => {
                        for iv in set {
                            writeln!(out, "{name},{},{}", iv.start, iv.end)?;
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DetectInterviews { guest, hosts, snapshot, video } => {
            let snap = open(&config, snapshot)?;
            let a = &snap.archive;
            let hosts: Vec<&str> = hosts.iter().map(String::as_str).collect();
            let mut out = io::stdout().lock();
            writeln!(out, "video,start_ms,end_ms")?;
            for id in selected(a, video.as_deref())? {
                let name = &a.video(id).expect("video exists").name;
                for iv in &detectors::detect_interviews(a, id, &guest, &hosts, &config.interviews)? {
                    writeln!(out, "{name},{},{}", iv.start, iv.end)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn selected(a: &newsframe_core::Archive, video: Option<&str>) -> anyhow::Result<Vec<newsframe_core::VideoId>> {
    match video {
        None => Ok(a.video_ids().collect()),
        Some(name) => match a.video_by_name(name) {
            Some(id) => Ok(vec![id]),
            None => bail!("unknown video {name:?}"),
        },
    }
}

fn query_error(e: &ServiceError) -> anyhow::Result<ExitCode> {
    eprintln!("error: {e}");
    if let Some(offset) = e.offset() {
        eprintln!("at byte offset {offset}");
        return Ok(ExitCode::from(EXIT_PARSE));
    }
    Ok(ExitCode::FAILURE)
}

fn ingest(config: &ServiceConfig, dir: &Path, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let (archive, report) = formats::ingest_dir(dir, config.archive_config())?;
    let out = out.unwrap_or_else(|| dir.join(newsframe::config::SNAPSHOT_FILE));
    let id = snapshot::save(&archive, &out)?;
    println!("videos      {}", report.videos);
    println!("persons     {}", report.persons);
    println!("faces       {}", report.faces);
    println!("tokens      {}", report.tokens);
    println!("luminance   {}", report.luminance);
    println!("descriptors {}", report.descriptors);
    if !report.videos_without_captions.is_empty() {
        println!("videos without captions (commercials unknown): {}", report.videos_without_captions.join(", "));
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("snapshot {id} -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}
