use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::interval::Millis;

/// A parsed filter expression. `And`/`Or` hold at least two children and
/// never directly contain a node of their own kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Filter(Filter),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Male,
    Female,
    Presenter,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Male => "male",
            Tag::Female => "female",
            Tag::Presenter => "presenter",
        }
    }
}

/// Local wall-clock hours `[start, end)`; wraps past midnight when `end <= start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HourRange {
    pub start: u8,
    pub end: u8,
}

impl HourRange {
    pub fn contains(self, hour: u32) -> bool {
        let (s, e) = (u32::from(self.start), u32::from(self.end));
        if s < e {
            (s..e).contains(&hour)
        } else {
            hour >= s || hour < e
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Commercials {
    Include,
    Exclude,
}

/// Leaf filters. List-valued filters match any of their entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Filter {
    Name(Vec<String>),
    Tag(Vec<Tag>),
    /// Phrases; words within a phrase are separated by single spaces.
    Text(Vec<String>),
    /// Centered widening applied to text matches in the same AND group.
    TextWindow(Millis),
    Channel(Vec<String>),
    Show(Vec<String>),
    Hour(HourRange),
    Commercials(Commercials),
}

impl Filter {
    pub fn key(&self) -> &'static str {
        match self {
            Filter::Name(_) => "name",
            Filter::Tag(_) => "tag",
            Filter::Text(_) => "text",
            Filter::TextWindow(_) => "textwindow",
            Filter::Channel(_) => "channel",
            Filter::Show(_) => "show",
            Filter::Hour(_) => "hour",
            Filter::Commercials(_) => "commercials",
        }
    }

    /// Filters that adjust their AND group instead of selecting time.
    pub fn is_modifier(&self) -> bool {
        matches!(self, Filter::TextWindow(_) | Filter::Commercials(_))
    }

    fn value(&self) -> String {
        let join = |items: &mut dyn Iterator<Item = &str>| {
            let mut out = String::new();
            for (i, s) in items.enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(s);
            }
            out
        };
        match self {
            Filter::Name(v) | Filter::Text(v) | Filter::Channel(v) | Filter::Show(v) => {
                join(&mut v.iter().map(String::as_str))
            }
            Filter::Tag(v) => join(&mut v.iter().map(|t| t.as_str())),
            Filter::TextWindow(ms) => format_seconds(*ms),
            Filter::Hour(h) => alloc::format!("{}-{}", h.start, h.end),
            Filter::Commercials(Commercials::Include) => "include".into(),
            Filter::Commercials(Commercials::Exclude) => "exclude".into(),
        }
    }
}

fn format_seconds(ms: Millis) -> String {
    let mut s = alloc::format!("{}.{:03}", ms / 1000, ms % 1000);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())?;
        f.write_str("=\"")?;
        for c in self.value().chars() {
            if c == '"' || c == '\\' {
                f.write_char('\\')?;
            }
            f.write_char(c)?;
        }
        f.write_char('"')
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Filter(filter) => write!(f, "{filter}"),
            Expr::And(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" AND ")?;
                    }
                    match c {
                        Expr::Or(_) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
            Expr::Or(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" OR ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}
