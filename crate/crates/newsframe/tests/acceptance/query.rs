//! Query evaluation against a cell-by-cell Boolean oracle built from the raw
//! records, and aggregation conservation.

use chrono::NaiveDate;
use newsframe_core::archive::{FaceEvent, IdentityLabel, Person, Token};
use newsframe_core::detectors::LuminanceSample;
use newsframe_core::query::{self, Commercials, Expr, Filter, HourRange, Tag};
use newsframe_core::time::{day_start_ms, BucketUnit, LocalClock};
use newsframe_core::{Archive, ArchiveBuilder, ArchiveConfig, Gender, Interval, IntervalSet, VideoId, VideoMeta};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Report;

const CELL: u32 = 10;
const PERIOD: u32 = 3_000;
const NAMES: [&str; 4] = ["Ann Lee", "Bo Chan", "Cy Diaz", "Di Eng"];
const CHANNELS: [&str; 3] = ["CNN", "FOX", "MSNBC"];
const SHOWS: [&str; 2] = ["Early", "Late"];
const WORDS: [&str; 6] = ["A", "B", "c", ">>", "Hello", "HELLO"];

/// Raw records of one video, kept for the oracle.
struct Raw {
    channel: &'static str,
    show: &'static str,
    air_utc: i64,
    duration: u32,
    faces: Vec<(u32, Gender, Option<usize>)>,
    tokens: Vec<(&'static str, u32, u32)>,
}

struct World {
    archive: Archive,
    raw: Vec<Raw>,
    presenter_on: Vec<Vec<&'static str>>,
    offset_ms: i64,
}

fn world(rng: &mut ChaCha8Rng) -> World {
    let offset_minutes = rng.gen_range(-10..=10) * 30;
    let config = ArchiveConfig { clock: LocalClock::Fixed { offset_minutes }, ..ArchiveConfig::default() };
    let mut b = ArchiveBuilder::new();
    let mut presenter_on = Vec::new();
    let mut ids = Vec::new();
    for name in NAMES {
        let on: Vec<&'static str> = CHANNELS.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
        let person = Person { presenter_on: on.iter().map(|c| c.to_string()).collect(), ..Person::named(name) };
        ids.push(b.add_person(person).unwrap());
        presenter_on.push(on);
    }
    let mut raw = Vec::new();
    for i in 0..3 {
        let channel = *CHANNELS.choose(rng).unwrap();
        let show = *SHOWS.choose(rng).unwrap();
        // Start shortly before an hour boundary so hour filters cut videos.
        let hour = day_start_ms(NaiveDate::from_ymd_opt(2016, 3, 1 + i).unwrap()) + rng.gen_range(0..24) * 3_600_000;
        let air_utc = hour - i64::from(rng.gen_range(0..9_000u32)) * i64::from(CELL);
        let duration = rng.gen_range(3_000..9_000u32) * CELL;
        let v = b
            .add_video(VideoMeta { name: format!("v{i}"), channel: channel.into(), show: show.into(), air_utc, duration })
            .unwrap();

        let mut faces = Vec::new();
        let mut times: Vec<u32> = (0..rng.gen_range(0..30)).map(|_| rng.gen_range(0..duration / CELL) * CELL).collect();
        times.sort_unstable();
        for t in times {
            let gender = if rng.gen_bool(0.5) { Gender::Male } else { Gender::Female };
            let who = rng.gen_bool(0.7).then(|| rng.gen_range(0..NAMES.len()));
            b.add_face(FaceEvent {
                video: v,
                t,
                bbox: [0.1, 0.1, 0.5, 0.5],
                gender,
                gender_score: 0.9,
                identity: who.map(|p| IdentityLabel { person: ids[p], score: 0.9 }),
                descriptor: None,
            })
            .unwrap();
            faces.push((t, gender, who));
        }

        let mut tokens = Vec::new();
        if rng.gen_bool(0.8) {
            let mut t = rng.gen_range(0..50) * 20;
            while t + 20 < duration {
                let word = *WORDS.choose(rng).unwrap();
                let t1 = (t + rng.gen_range(1..=30) * 20).min(duration);
                let word_id = b.intern_word(word);
                b.add_token(v, Token { word: word_id, seq: tokens.len() as u32, t0: t, t1 }).unwrap();
                tokens.push((word, t, t1));
                t += rng.gen_range(1..=40) * 20;
            }
        }
        // Sparse luminance with occasional dark stretches, so masks vary.
        let mut t = 0;
        while t < duration {
            let value = if rng.gen_ratio(1, 8) { 0.0 } else { 0.5 };
            b.add_luminance(v, LuminanceSample { t, value }).unwrap();
            t += rng.gen_range(1..=200) * CELL;
        }
        raw.push(Raw { channel, show, air_utc, duration, faces, tokens });
    }
    World { archive: b.build(config).unwrap(), raw, presenter_on, offset_ms: i64::from(offset_minutes) * 60_000 }
}

fn random_leaf(rng: &mut ChaCha8Rng) -> Filter {
    let pick = |rng: &mut ChaCha8Rng, from: &[&str], n: usize| -> Vec<String> {
        from.choose_multiple(rng, n).map(|s| s.to_string()).collect()
    };
    match rng.gen_range(0..7) {
        0 => {
            let n = rng.gen_range(1..=2);
            let mut names = pick(rng, &NAMES, n);
            if rng.gen_ratio(1, 6) {
                names.push("Nobody Known".into());
            }
            Filter::Name(names)
        }
        1 | 2 => {
            let n = rng.gen_range(1..=2);
            Filter::Tag([Tag::Male, Tag::Female, Tag::Presenter].choose_multiple(rng, n).copied().collect())
        }
        3 => {
            let n = rng.gen_range(1..=2);
            let phrases = (0..n)
                .map(|_| {
                    let len = rng.gen_range(1..=2);
                    (0..len).map(|_| WORDS.choose(rng).unwrap().to_lowercase()).collect::<Vec<_>>().join(" ")
                })
                .collect();
            Filter::Text(phrases)
        }
        4 => {
            let n = rng.gen_range(1..=2);
            Filter::Channel(pick(rng, &CHANNELS, n))
        }
        5 => Filter::Show(pick(rng, &SHOWS, 1)),
        _ => {
            // Parseable ranges only: start and end differ.
            let start = rng.gen_range(0..24);
            Filter::Hour(HourRange { start, end: (start + rng.gen_range(1..24)) % 24 })
        }
    }
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32, parent_and: Option<bool>) -> Expr {
    if depth == 0 || rng.gen_ratio(1, 3) {
        return Expr::Filter(random_leaf(rng));
    }
    let and = match parent_and {
        Some(p) => !p,
        None => rng.gen_bool(0.5),
    };
    let mut children: Vec<Expr> = (0..rng.gen_range(2..=3)).map(|_| random_expr(rng, depth - 1, Some(and))).collect();
    if !and {
        return Expr::Or(children);
    }
    if rng.gen_ratio(1, 3) {
        let mode = if rng.gen_bool(0.5) { Commercials::Include } else { Commercials::Exclude };
        children.push(Expr::Filter(Filter::Commercials(mode)));
    }
    if children.iter().any(|c| matches!(c, Expr::Filter(Filter::Text(_)))) && rng.gen_bool(0.5) {
        children.push(Expr::Filter(Filter::TextWindow(rng.gen_range(1..=200) * 20)));
    }
    children.shuffle(rng);
    Expr::And(children)
}

type Cells = Vec<bool>;

fn paint(cells: &mut [bool], start: u32, end: u32) {
    let end = end.min(cells.len() as u32 * CELL);
    for c in start / CELL..end.div_ceil(CELL) {
        cells[c as usize] = true;
    }
}

fn set_cells(set: &IntervalSet, n: usize) -> Cells {
    let mut cells = vec![false; n];
    for iv in set {
        paint(&mut cells, iv.start, iv.end);
    }
    cells
}

#[derive(Clone, Copy)]
struct Ctx {
    mask: bool,
    window: Option<u32>,
}

struct Oracle<'w> {
    w: &'w World,
    v: usize,
    news: Option<Cells>,
}

impl Oracle<'_> {
    fn n(&self) -> usize {
        (self.w.raw[self.v].duration / CELL) as usize
    }

    fn restrict(&self, raw: Cells, ctx: Ctx) -> Cells {
        if !ctx.mask {
            return raw;
        }
        match &self.news {
            Some(news) => raw.iter().zip(news).map(|(&r, &n)| r && n).collect(),
            None => vec![false; raw.len()],
        }
    }

    fn faces(&self, keep: impl Fn(Gender, Option<usize>) -> bool) -> Cells {
        let mut cells = vec![false; self.n()];
        for &(t, g, who) in &self.w.raw[self.v].faces {
            if keep(g, who) {
                paint(&mut cells, t, t + PERIOD);
            }
        }
        cells
    }

    fn leaf(&self, f: &Filter, ctx: Ctx) -> Cells {
        let r = &self.w.raw[self.v];
        let n = self.n();
        let all = vec![true; n];
        let raw = match f {
            Filter::Name(names) => {
                let people: Vec<usize> = names.iter().filter_map(|x| NAMES.iter().position(|k| k == x)).collect();
                self.faces(|_, who| who.is_some_and(|p| people.contains(&p)))
            }
            Filter::Tag(tags) => self.faces(|g, who| {
                tags.iter().any(|t| match t {
                    Tag::Male => g == Gender::Male,
                    Tag::Female => g == Gender::Female,
                    Tag::Presenter => who.is_some_and(|p| self.w.presenter_on[p].contains(&r.channel)),
                })
            }),
            Filter::Text(phrases) => {
                let mut cells = vec![false; n];
                for phrase in phrases {
                    let words: Vec<String> = phrase.split(' ').map(str::to_uppercase).collect();
                    for i in 0..r.tokens.len() {
                        let hit = i + words.len() <= r.tokens.len()
                            && words.iter().enumerate().all(|(k, w)| r.tokens[i + k].0.to_uppercase() == *w);
                        if !hit {
                            continue;
                        }
                        let (s, e) = (r.tokens[i].1, r.tokens[i + words.len() - 1].2);
                        let (s, e) = match ctx.window {
                            None => (s, e),
                            Some(w) => {
                                let mid = (s + e) / 2;
                                let start = mid.saturating_sub(w / 2);
                                (start, (start + w).min(r.duration))
                            }
                        };
                        paint(&mut cells, s, e);
                    }
                }
                cells
            }
            Filter::Channel(c) => {
                if c.iter().any(|x| x.eq_ignore_ascii_case(r.channel)) {
                    all
                } else {
                    vec![false; n]
                }
            }
            Filter::Show(s) => {
                if s.iter().any(|x| x.eq_ignore_ascii_case(r.show)) {
                    all
                } else {
                    vec![false; n]
                }
            }
            Filter::Hour(h) => (0..n)
                .map(|c| {
                    let local = r.air_utc + self.w.offset_ms + i64::from(c as u32 * CELL);
                    let hour = (local.rem_euclid(86_400_000) / 3_600_000) as u8;
                    if h.start < h.end {
                        (h.start..h.end).contains(&hour)
                    } else {
                        hour >= h.start || hour < h.end
                    }
                })
                .collect(),
            Filter::TextWindow(_) | Filter::Commercials(_) => all,
        };
        self.restrict(raw, ctx)
    }

    fn eval(&self, e: &Expr, ctx: Ctx) -> Cells {
        let n = self.n();
        match e {
            Expr::Filter(f) => self.leaf(f, ctx),
            Expr::Or(children) => children.iter().fold(vec![false; n], |acc, c| {
                acc.iter().zip(self.eval(c, ctx)).map(|(&a, b)| a || b).collect()
            }),
            Expr::And(children) => {
                let mut ctx = ctx;
                for c in children {
                    match c {
                        Expr::Filter(Filter::Commercials(m)) => ctx.mask = *m == Commercials::Exclude,
                        Expr::Filter(Filter::TextWindow(w)) => ctx.window = Some(*w),
                        _ => {}
                    }
                }
                let selecting: Vec<&Expr> =
                    children.iter().filter(|c| !matches!(c, Expr::Filter(f) if f.is_modifier())).collect();
                if selecting.is_empty() {
                    return self.restrict(vec![true; n], ctx);
                }
                selecting.iter().fold(vec![true; n], |acc, c| {
                    acc.iter().zip(self.eval(c, ctx)).map(|(&a, b)| a && b).collect()
                })
            }
        }
    }
}

fn runs(cells: &[bool]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        if cells[i] {
            let s = i;
            while i < cells.len() && cells[i] {
                i += 1;
            }
            out.push((s as u32 * CELL, i as u32 * CELL));
        } else {
            i += 1;
        }
    }
    out
}

#[test]
fn query_engine() {
    let mut report = Report::new("query engine");

    let example = r#"name="Hillary Clinton" AND text="email" AND channel="FOX""#;
    let expected = Expr::And(vec![
        Expr::Filter(Filter::Name(vec!["Hillary Clinton".into()])),
        Expr::Filter(Filter::Text(vec!["email".into()])),
        Expr::Filter(Filter::Channel(vec!["FOX".into()])),
    ]);
    let parsed = query::parse(example);
    report.check(parsed.as_ref() == Ok(&expected), format!("example parses to AND(name, text, channel): {parsed:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(0x0e_7a1);
    let (mut cases, mut mismatches, mut roundtrip_failures) = (0, 0, 0);
    let mut non_empty = 0;
    for _ in 0..50 {
        let w = world(&mut rng);
        for _ in 0..10 {
            let expr = random_expr(&mut rng, 3, None);
            cases += 1;
            let back = query::parse(&expr.to_string());
            if back.as_ref() != Ok(&expr) {
                roundtrip_failures += 1;
                if roundtrip_failures <= 3 {
                    report.note(format!("round trip of {expr} gave {back:?}"));
                }
            }
            let got = query::eval(&w.archive, &expr);
            let mut ok = got.sets.len() == w.raw.len();
            for (v, set) in got.sets.iter().enumerate() {
                let oracle = Oracle { w: &w, v, news: None };
                let news = w.archive.news_content(VideoId(v as u32)).map(|s| set_cells(s, oracle.n()));
                let oracle = Oracle { news, ..oracle };
                let want = runs(&oracle.eval(&expr, Ctx { mask: true, window: None }));
                let have: Vec<(u32, u32)> = set.iter().map(|iv| (iv.start, iv.end)).collect();
                non_empty += usize::from(!want.is_empty());
                ok &= have == want;
            }
            if !ok {
                mismatches += 1;
                if mismatches <= 3 {
                    report.note(format!("mismatch on {expr}"));
                }
            }
        }
    }
    report.check(mismatches == 0, format!("{cases} random ASTs: {mismatches} disagree with the cell oracle"));
    report.check(non_empty > cases / 4, format!("{non_empty} non-empty per-video results (oracle is not vacuous)"));
    report.check(roundtrip_failures == 0, format!("display/parse round trip: {roundtrip_failures} failures"));

    // Conservation: every millisecond lands in exactly one bucket.
    let mut violations = 0;
    let mut ordered = true;
    for _ in 0..200 {
        let mut b = ArchiveBuilder::new();
        let mut sets = Vec::new();
        for i in 0..4u32 {
            // Near a year, month or week boundary, lasting up to three hours.
            let boundary = day_start_ms(NaiveDate::from_ymd_opt(2015 + i as i32, 1 + rng.gen_range(0..12), 1).unwrap());
            let air_utc = boundary - rng.gen_range(0..4 * 3_600_000);
            let duration = rng.gen_range(60_000..3 * 3_600_000);
            let v = b
                .add_video(VideoMeta { name: format!("v{i}"), channel: "CNN".into(), show: "S".into(), air_utc, duration })
                .unwrap();
            let mut ivs: Vec<Interval> = (0..rng.gen_range(0..20))
                .map(|_| {
                    let s = rng.gen_range(0..duration);
                    Interval::new(s, rng.gen_range(s..=duration))
                })
                .collect();
            ivs.retain(|iv| !iv.is_empty());
            sets.push(IntervalSet::canonical(v, ivs).unwrap());
        }
        let a = b.build(ArchiveConfig::default()).unwrap();
        let expected: u64 = sets.iter().map(IntervalSet::duration_sum).sum();
        for unit in [BucketUnit::Day, BucketUnit::Week, BucketUnit::Month, BucketUnit::Year] {
            let ts = query::aggregate(&a, &sets, unit, false);
            violations += usize::from(ts.total_millis() != expected);
            ordered &= ts.points.windows(2).all(|p| p[0].bucket < p[1].bucket);
        }
    }
    report.check(violations == 0, format!("aggregation conserves duration_sum: {violations} violations in 800 series"));
    report.check(ordered, "bucket dates strictly increasing");
    report.finish();
}
