//! Editable term lists used by the analytics. Defaults are compiled in from
//! `data/`; a directory holding files of the same names overrides them one by
//! one.
//!
//! - `countries.csv`: `canonical,alias,exclusion_prev` with `;` between
//!   excluded predecessor words. A country left out of the file is never counted.
//! - `events.csv`: `date,category,name,terms` with `;` between term phrases.
//! - `mention_rules.json`: an array of mention rules.
//! - `stopwords.txt`, `name_denylist.txt`: one word per line, `#` comments.

use std::path::Path;

use chrono::NaiveDate;
use newsframe_core::analytics::{CountryAlias, CountryLexicon, Event, MentionRule, WordFilter};
use serde::Deserialize;

use crate::error::LexiconError;

pub const COUNTRIES: &str = "countries.csv";
pub const EVENTS: &str = "events.csv";
pub const MENTION_RULES: &str = "mention_rules.json";
pub const STOPWORDS: &str = "stopwords.txt";
pub const NAME_DENYLIST: &str = "name_denylist.txt";

const DEFAULT_COUNTRIES: &str = include_str!("../data/countries.csv");
const DEFAULT_EVENTS: &str = include_str!("../data/events.csv");
const DEFAULT_MENTION_RULES: &str = include_str!("../data/mention_rules.json");
const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_NAME_DENYLIST: &str = include_str!("../data/name_denylist.txt");

fn record_error(file: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Record { file: file.to_string(), line, message: message.into() }
}

fn split_list(field: &str) -> Vec<String> {
    field.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Rows of a headed CSV file, each with its 1-based line number.
fn csv_rows<T: for<'de> Deserialize<'de>>(text: &str, file: &str) -> Result<Vec<(usize, T)>, LexiconError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|row| {
            row.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                record_error(file, line, e.to_string())
            })
        })
        .enumerate()
        .map(|(i, row)| row.map(|r| (i + 2, r)))
        .collect()
}

#[derive(Deserialize)]
struct CountryRow {
    canonical: String,
    alias: String,
    #[serde(default)]
    exclusion_prev: String,
}

pub fn parse_countries(text: &str, file: &str) -> Result<CountryLexicon, LexiconError> {
    let mut entries = Vec::new();
    for (line, row) in csv_rows::<CountryRow>(text, file)? {
        if row.canonical.is_empty() || row.alias.is_empty() {
            return Err(record_error(file, line, "canonical name and alias are required"));
        }
        entries.push(CountryAlias {
            country: row.canonical,
            alias: row.alias,
            excluded_prev: split_list(&row.exclusion_prev),
        });
    }
    Ok(CountryLexicon::new(entries)?)
}

#[derive(Deserialize)]
struct EventRow {
    date: String,
    category: String,
    name: String,
    terms: String,
}

pub fn parse_events(text: &str, file: &str) -> Result<Vec<Event>, LexiconError> {
    csv_rows::<EventRow>(text, file)?
        .into_iter()
        .map(|(line, row)| {
            let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
                .map_err(|e| record_error(file, line, format!("bad date {:?}: {e}", row.date)))?;
            let terms = split_list(&row.terms);
            if terms.is_empty() {
                return Err(record_error(file, line, "event has no terms"));
            }
            Ok(Event { date, category: row.category, name: row.name, terms })
        })
        .collect()
}

pub fn parse_mention_rules(text: &str, file: &str) -> Result<Vec<MentionRule>, LexiconError> {
    let rules: Vec<MentionRule> =
        serde_json::from_str(text).map_err(|e| record_error(file, e.line(), e.to_string()))?;
    for rule in &rules {
        rule.validate()?;
    }
    Ok(rules)
}

pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_uppercase)
        .collect()
}

#[derive(Debug)]
pub struct Lexicons {
    pub countries: CountryLexicon,
    pub events: Vec<Event>,
    pub mention_rules: Vec<MentionRule>,
    pub stopwords: Vec<String>,
    pub name_denylist: Vec<String>,
}

impl Lexicons {
    /// The shipped lists.
    pub fn builtin() -> Self {
        Lexicons {
            countries: parse_countries(DEFAULT_COUNTRIES, COUNTRIES).expect("shipped countries parse"),
            events: parse_events(DEFAULT_EVENTS, EVENTS).expect("shipped events parse"),
            mention_rules: parse_mention_rules(DEFAULT_MENTION_RULES, MENTION_RULES).expect("shipped rules parse"),
            stopwords: parse_word_list(DEFAULT_STOPWORDS),
            name_denylist: parse_word_list(DEFAULT_NAME_DENYLIST),
        }
    }

    /// The shipped lists with any files present in `dir` taking their place.
    pub fn load(dir: &Path) -> Result<Self, LexiconError> {
        let mut lex = Lexicons::builtin();
        let read = |name: &str| -> Result<Option<String>, LexiconError> {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(t) => Ok(Some(t)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(source) => Err(LexiconError::Io { path, source }),
            }
        };
        if let Some(t) = read(COUNTRIES)? {
            lex.countries = parse_countries(&t, COUNTRIES)?;
        }
        if let Some(t) = read(EVENTS)? {
            lex.events = parse_events(&t, EVENTS)?;
        }
        if let Some(t) = read(MENTION_RULES)? {
            lex.mention_rules = parse_mention_rules(&t, MENTION_RULES)?;
        }
        if let Some(t) = read(STOPWORDS)? {
            lex.stopwords = parse_word_list(&t);
        }
        if let Some(t) = read(NAME_DENYLIST)? {
            lex.name_denylist = parse_word_list(&t);
        }
        Ok(lex)
    }

    pub fn word_filter(&self) -> WordFilter {
        WordFilter::new(&self.stopwords, &self.name_denylist)
    }

    pub fn mention_rule(&self, name: &str) -> Option<&MentionRule> {
        self.mention_rules.iter().find(|r| r.name.eq_ignore_ascii_case(name))
    }
}
