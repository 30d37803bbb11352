//! Mention and country counting against independent reference matchers.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use newsframe::lexicon::Lexicons;
use newsframe_core::analytics::{country_mentions, mention_counts, CountryLexicon, MentionCounts, MentionRule, Scope};
use newsframe_core::archive::Token;
use newsframe_core::time::{day_start_ms, BucketUnit};
use newsframe_core::{Archive, ArchiveBuilder, ArchiveConfig, VideoMeta};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use crate::Report;

const COUNTRIES_CSV: &str = include_str!("../../data/countries.csv");
const STREAMS: usize = 10_000;
const PER_ARCHIVE: usize = 200;
const FILLER: [&str; 8] = ["THE", "OF", "AND", "SAID", "TODAY", "REPUBLIC", "NORTH", "CITY"];

/// (country, alias words, excluded previous words), read straight from the shipped file.
fn reference_lexicon() -> Vec<(String, Vec<String>, Vec<String>)> {
    COUNTRIES_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            let split = |s: &str| s.split(['|', ';']).map(|w| w.trim().to_uppercase()).filter(|w| !w.is_empty()).collect();
            (cols[0].to_string(), cols[1].split_whitespace().map(str::to_uppercase).collect(), split(cols.get(2).unwrap_or(&"")))
        })
        .collect()
}

struct CountryRef {
    regex: Regex,
    /// Alias text (words joined by two spaces) to (country, excluded previous words).
    by_alias: BTreeMap<String, (String, Vec<String>)>,
}

impl CountryRef {
    fn new() -> Self {
        let mut rows = reference_lexicon();
        rows.sort_by_key(|r| std::cmp::Reverse(r.1.len()));
        let mut by_alias: BTreeMap<String, (String, Vec<String>)> = BTreeMap::new();
        let mut alternatives = Vec::new();
        for (country, words, excluded) in rows {
            let key = words.join("  ");
            if !by_alias.contains_key(&key) {
                alternatives.push(regex::escape(&key));
            }
            by_alias.entry(key).or_insert_with(|| (country, Vec::new())).1.extend(excluded);
        }
        let regex = Regex::new(&format!(" ({}) ", alternatives.join("|"))).unwrap();
        CountryRef { regex, by_alias }
    }

    /// Counts per country in one stream of uppercase words.
    fn count(&self, words: &[String]) -> BTreeMap<String, u64> {
        let text = format!(" {} ", words.join("  "));
        let mut out = BTreeMap::new();
        for caps in self.regex.captures_iter(&text) {
            let m = caps.get(1).unwrap();
            let (country, excluded) = &self.by_alias[m.as_str()];
            // Everything before the match, as words.
            let previous = text[..m.start()].split_whitespace().last();
            if previous.is_some_and(|p| excluded.iter().any(|e| e == p)) {
                continue;
            }
            *out.entry(country.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// Classifies each occurrence of a single-word target by string comparison.
fn reference_mentions(rule: &MentionRule, words: &[String]) -> MentionCounts {
    let upper = |v: &[String]| v.iter().map(|s| s.to_uppercase()).collect::<Vec<_>>();
    let (prev, next, first) = (upper(&rule.excluded_prev), upper(&rule.excluded_next), upper(&rule.excluded_first_names));
    let target = rule.target.to_uppercase();
    let mut counts = MentionCounts::default();
    for (i, w) in words.iter().enumerate() {
        if *w != target {
            continue;
        }
        let before = words[..i].join(" ");
        let honorific = rule.honorifics.iter().any(|h| {
            let h = h.to_uppercase();
            before == h || before.ends_with(&format!(" {h}"))
        });
        let p = i.checked_sub(1).map(|j| &words[j]);
        let n = words.get(i + 1);
        if honorific {
            counts.honorific += 1;
        } else if p.is_some_and(|p| prev.contains(p) || first.contains(p)) || n.is_some_and(|n| next.contains(n)) {
            counts.excluded += 1;
        } else {
            counts.bare += 1;
        }
    }
    counts
}

fn random_case(rng: &mut ChaCha8Rng, w: &str) -> String {
    match rng.gen_range(0..4) {
        0 => w.to_lowercase(),
        1 => {
            let mut c = w.chars();
            c.next().map(|f| f.to_string() + &c.as_str().to_lowercase()).unwrap_or_default()
        }
        _ => w.to_string(),
    }
}

/// Streams are built from fragments that make the matchers disagree if
/// either gets precedence or exclusions wrong.
fn random_stream(rng: &mut ChaCha8Rng, vocab: &[String], rules: &[MentionRule]) -> Vec<String> {
    let aliases = reference_lexicon();
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(0..30) {
        match rng.gen_range(0..6) {
            0 => {
                let (_, words, _) = aliases.choose(rng).unwrap();
                let cut = if rng.gen_ratio(1, 4) { rng.gen_range(1..=words.len()) } else { words.len() };
                out.extend(words[..cut].iter().cloned());
            }
            1 => out.push(vocab.choose(rng).unwrap().clone()),
            2 => out.push(FILLER.choose(rng).unwrap().to_string()),
            _ => {
                let rule = rules.choose(rng).unwrap();
                let pools = [&rule.honorifics, &rule.excluded_prev, &rule.excluded_next, &rule.excluded_first_names];
                let pool = pools.choose(rng).unwrap();
                if rng.gen_bool(0.5) {
                    if let Some(p) = pool.choose(rng) {
                        out.extend(p.split_whitespace().map(String::from));
                    }
                }
                out.push(rule.target.clone());
                if rng.gen_bool(0.3) {
                    if let Some(p) = rule.excluded_next.choose(rng) {
                        out.push(p.clone());
                    }
                }
            }
        }
    }
    out
}

fn archive(streams: &[Vec<String>], rng: &mut ChaCha8Rng) -> Archive {
    let mut b = ArchiveBuilder::new();
    for (i, words) in streams.iter().enumerate() {
        let day = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Days::new(i as u64);
        let v = b
            .add_video(VideoMeta {
                name: format!("s{i}"),
                channel: "CNN".into(),
                show: "S".into(),
                air_utc: day_start_ms(day) + 3_600_000,
                duration: 600_000,
            })
            .unwrap();
        for (seq, w) in words.iter().enumerate() {
            let word = b.intern_word(&random_case(rng, w));
            let t0 = seq as u32 * 500;
            b.add_token(v, Token { word, seq: seq as u32, t0, t1: t0 + 400 }).unwrap();
        }
    }
    b.build(ArchiveConfig::default()).unwrap()
}

fn text_archive(text: &str) -> Archive {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    archive(&[text.split_whitespace().map(String::from).collect()], &mut rng)
}

#[test]
fn mention_and_country_counting() {
    let mut report = Report::new("mention and country counting");
    let lex = Lexicons::builtin();
    let countries: &CountryLexicon = &lex.countries;
    let reference = CountryRef::new();

    let new_mexico = country_mentions(&text_archive("FLOODING IN NEW MEXICO AND MEXICO"), countries, BucketUnit::Day, Scope::All);
    report.check(new_mexico.total_for("Mexico") == 1, format!("NEW MEXICO not counted: Mexico = {}", new_mexico.total_for("Mexico")));
    let only_new = country_mentions(&text_archive("NEW MEXICO"), countries, BucketUnit::Day, Scope::All);
    report.check(only_new.total_for("Mexico") == 0, format!("\"NEW MEXICO\" alone: Mexico = {}", only_new.total_for("Mexico")));
    let holy = country_mentions(&text_archive("THE VATICAN OR THE HOLY SEE"), countries, BucketUnit::Day, Scope::All);
    report.check(holy.total_for("Vatican City") == 2, format!("VATICAN + HOLY SEE: Vatican City = {}", holy.total_for("Vatican City")));

    let mut vocab: Vec<String> = reference_lexicon().into_iter().flat_map(|(_, w, e)| w.into_iter().chain(e)).collect();
    vocab.sort();
    vocab.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0_0a7);
    let (mut country_bad, mut mention_bad, mut hits) = (0usize, 0usize, 0u64);
    for _ in 0..STREAMS / PER_ARCHIVE {
        let streams: Vec<Vec<String>> = (0..PER_ARCHIVE).map(|_| random_stream(&mut rng, &vocab, &lex.mention_rules)).collect();
        let a = archive(&streams, &mut rng);
        let got = country_mentions(&a, countries, BucketUnit::Day, Scope::All);
        let by_rule: Vec<_> =
            lex.mention_rules.iter().map(|r| mention_counts(&a, r, BucketUnit::Day, Scope::All).unwrap()).collect();
        for (i, words) in streams.iter().enumerate() {
            let day = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Days::new(i as u64);
            let want = reference.count(words);
            hits += want.values().sum::<u64>();
            let have: BTreeMap<String, u64> = got
                .buckets
                .get(&day)
                .map(|row| {
                    got.countries.iter().zip(row).filter(|(_, &n)| n > 0).map(|(c, &n)| (c.clone(), n)).collect()
                })
                .unwrap_or_default();
            if have != want {
                country_bad += 1;
                if country_bad <= 3 {
                    report.note(format!("country mismatch on {words:?}: want {want:?}, have {have:?}"));
                }
            }
            for (rule, counts) in lex.mention_rules.iter().zip(&by_rule) {
                let want = reference_mentions(rule, words);
                let have = counts.get(&day).copied().unwrap_or_default();
                if have != want {
                    mention_bad += 1;
                    if mention_bad <= 3 {
                        report.note(format!("{} mismatch on {words:?}: want {want:?}, have {have:?}", rule.name));
                    }
                }
            }
        }
    }
    report.note(format!("{hits} reference country hits"));
    report.check(country_bad == 0, format!("countries: {country_bad} mismatches in {STREAMS} streams"));
    report.check(mention_bad == 0, format!("mentions: {mention_bad} mismatches in {STREAMS} streams x {} rules", lex.mention_rules.len()));
    report.finish();
}
