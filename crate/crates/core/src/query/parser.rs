//! Recursive-descent parser for the filter language.
//!
//! ```text
//! expr     := and_expr (OR and_expr)*
//! and_expr := atom (AND atom)*
//! atom     := key '=' '"' value '"' | '(' expr ')'
//! ```
//!
//! Keys and connectives are case-insensitive. Inside a value, `\"` and `\\`
//! escape a quote and a backslash.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{Commercials, Expr, Filter, HourRange, Tag};
use crate::error::{ParseError, ParseErrorKind};

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: input, pos: 0, deferred: None, windows: Vec::new() };
    p.skip_ws();
    if p.pos == input.len() {
        return Err(p.error(ParseErrorKind::UnexpectedEnd));
    }
    let expr = p.expr(None)?;
    p.skip_ws();
    if p.pos < input.len() {
        return Err(p.unexpected());
    }
    // Syntax errors take precedence over bad keys and values.
    if let Some(err) = p.deferred {
        return Err(err);
    }
    let mut seen = 0;
    validate(&expr, &mut seen).map_err(|(k, kind)| ParseError { offset: p.windows[k], kind })?;
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    deferred: Option<ParseError>,
    /// Offsets of `textwindow` filters in source order.
    windows: Vec<usize>,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn unexpected(&self) -> ParseError {
        let snippet: String = self.rest().chars().take(16).collect();
        self.error(ParseErrorKind::Unexpected(snippet))
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    /// Consumes `word` (case-insensitive) if it appears as a whole word next.
    fn keyword(&mut self, word: &str) -> Option<usize> {
        self.skip_ws();
        let rest = self.rest();
        let n = word.len();
        if rest.len() >= n && rest.is_char_boundary(n) && rest[..n].eq_ignore_ascii_case(word) {
            let boundary = rest[n..].chars().next().is_none_or(|c| !(c.is_alphanumeric() || c == '_'));
            if boundary {
                let at = self.pos;
                self.pos += n;
                return Some(at);
            }
        }
        None
    }

    /// `dangling` is the offset of the connective that demanded this operand.
    fn expr(&mut self, dangling: Option<usize>) -> Result<Expr, ParseError> {
        let mut terms = alloc::vec![self.and_expr(dangling)?];
        while let Some(at) = self.keyword("OR") {
            terms.push(self.and_expr(Some(at))?);
        }
        Ok(flatten(terms, Expr::Or))
    }

    fn and_expr(&mut self, dangling: Option<usize>) -> Result<Expr, ParseError> {
        let mut atoms = alloc::vec![self.atom(dangling)?];
        while let Some(at) = self.keyword("AND") {
            atoms.push(self.atom(Some(at))?);
        }
        Ok(flatten(atoms, Expr::And))
    }

    fn atom(&mut self, dangling: Option<usize>) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.rest().is_empty() {
            let offset = dangling.unwrap_or(self.pos);
            return Err(ParseError { offset, kind: ParseErrorKind::UnexpectedEnd });
        }
        if self.rest().starts_with('(') {
            let open = self.pos;
            self.pos += 1;
            let inner = self.expr(Some(open))?;
            self.skip_ws();
            if !self.rest().starts_with(')') {
                return Err(if self.rest().is_empty() {
                    ParseError { offset: open, kind: ParseErrorKind::UnexpectedEnd }
                } else {
                    self.unexpected()
                });
            }
            self.pos += 1;
            return Ok(inner);
        }
        let key_at = self.pos;
        let key_len = self.rest().find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(self.rest().len());
        if key_len == 0 {
            return Err(self.unexpected());
        }
        let key = self.rest()[..key_len].to_ascii_lowercase();
        self.pos += key_len;
        self.skip_ws();
        if !self.rest().starts_with('=') {
            return Err(if self.rest().is_empty() { self.error(ParseErrorKind::UnexpectedEnd) } else { self.unexpected() });
        }
        self.pos += 1;
        self.skip_ws();
        if !self.rest().starts_with('"') {
            return Err(if self.rest().is_empty() { self.error(ParseErrorKind::UnexpectedEnd) } else { self.unexpected() });
        }
        let value_at = self.pos;
        let value = self.quoted()?;
        let filter = match build_filter(&key, &value) {
            Ok(filter) => filter,
            Err(kind) => {
                let offset = if matches!(kind, ParseErrorKind::UnknownKey(_)) { key_at } else { value_at };
                self.deferred.get_or_insert(ParseError { offset, kind });
                Filter::Name(Vec::new())
            }
        };
        if matches!(filter, Filter::TextWindow(_)) {
            self.windows.push(key_at);
        }
        Ok(Expr::Filter(filter))
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        let open = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => out.push(e),
                    Some((_, other)) => {
                        out.push('\\');
                        out.push(other);
                    }
                    None => break,
                },
                _ => out.push(c),
            }
        }
        Err(ParseError { offset: open, kind: ParseErrorKind::UnterminatedValue })
    }
}

fn flatten(mut items: Vec<Expr>, wrap: fn(Vec<Expr>) -> Expr) -> Expr {
    if items.len() == 1 {
        return items.pop().expect("one item");
    }
    let same_kind = |e: &Expr| matches!((wrap(Vec::new()), e), (Expr::And(_), Expr::And(_)) | (Expr::Or(_), Expr::Or(_)));
    let mut flat = Vec::with_capacity(items.len());
    for item in items {
        if same_kind(&item) {
            match item {
                Expr::And(inner) | Expr::Or(inner) => flat.extend(inner),
                Expr::Filter(_) => unreachable!(),
            }
        } else {
            flat.push(item);
        }
    }
    wrap(flat)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| !s.is_empty())
        .collect()
}

fn nonempty(key: &'static str, items: Vec<String>) -> Result<Vec<String>, ParseErrorKind> {
    if items.is_empty() {
        Err(ParseErrorKind::BadValue { key, reason: "empty value" })
    } else {
        Ok(items)
    }
}

fn build_filter(key: &str, value: &str) -> Result<Filter, ParseErrorKind> {
    Ok(match key {
        "name" => Filter::Name(nonempty("name", list(value))?),
        "text" => Filter::Text(nonempty("text", list(value))?),
        "channel" => Filter::Channel(nonempty("channel", list(value))?),
        "show" => Filter::Show(nonempty("show", list(value))?),
        "tag" => {
            let tags = nonempty("tag", list(value))?
                .iter()
                .map(|t| match t.to_ascii_lowercase().as_str() {
                    "male" => Ok(Tag::Male),
                    "female" => Ok(Tag::Female),
                    "presenter" | "host" => Ok(Tag::Presenter),
                    _ => Err(ParseErrorKind::BadValue { key: "tag", reason: "expected male, female or presenter" }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Filter::Tag(tags)
        }
        "textwindow" => Filter::TextWindow(parse_seconds(value.trim())?),
        "hour" => Filter::Hour(parse_hours(value.trim())?),
        "commercials" => match value.trim().to_ascii_lowercase().as_str() {
            "include" => Filter::Commercials(Commercials::Include),
            "exclude" => Filter::Commercials(Commercials::Exclude),
            _ => return Err(ParseErrorKind::BadValue { key: "commercials", reason: "expected include or exclude" }),
        },
        other => return Err(ParseErrorKind::UnknownKey(other.to_string())),
    })
}

/// Non-negative decimal seconds with at most millisecond precision.
fn parse_seconds(value: &str) -> Result<u32, ParseErrorKind> {
    let bad = ParseErrorKind::BadValue { key: "textwindow", reason: "expected seconds, e.g. 1 or 2.5" };
    let (whole, frac) = value.split_once('.').unwrap_or((value, ""));
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(whole) || (!frac.is_empty() && !digits(frac)) || frac.len() > 3 || whole.len() > 6 {
        return Err(bad);
    }
    let whole: u32 = whole.parse().map_err(|_| bad.clone())?;
    let mut ms = 0u32;
    for (i, b) in frac.bytes().enumerate() {
        ms += u32::from(b - b'0') * [100, 10, 1][i];
    }
    let total = whole * 1000 + ms;
    if total == 0 {
        return Err(ParseErrorKind::BadValue { key: "textwindow", reason: "window must be positive" });
    }
    Ok(total)
}

/// `H` (one hour) or `H-H` with hours in 0..24; an end of 24 means midnight.
fn parse_hours(value: &str) -> Result<HourRange, ParseErrorKind> {
    let bad = ParseErrorKind::BadValue { key: "hour", reason: "expected H or H-H with hours in 0..24" };
    let hour = |s: &str| -> Result<u8, ParseErrorKind> {
        let s = s.trim();
        if s.is_empty() || s.len() > 2 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad.clone());
        }
        s.parse::<u8>().map_err(|_| bad.clone())
    };
    let (start, end) = match value.split_once('-') {
        Some((a, b)) => (hour(a)?, hour(b)?),
        None => {
            let h = hour(value)?;
            (h, h + 1)
        }
    };
    if start > 23 || end > 24 || start == end {
        return Err(bad);
    }
    Ok(HourRange { start, end: end % 24 })
}

/// Every AND group containing a `textwindow` must also contain a `text`
/// filter, and at most one window. Errors carry the index of the offending
/// window in source order.
fn validate(expr: &Expr, seen: &mut usize) -> Result<(), (usize, ParseErrorKind)> {
    match expr {
        Expr::Filter(Filter::TextWindow(_)) => Err((*seen, ParseErrorKind::OrphanTextWindow)),
        Expr::Filter(_) => Ok(()),
        Expr::Or(children) => children.iter().try_for_each(|c| validate(c, seen)),
        Expr::And(children) => {
            let has_text = children.iter().any(|c| matches!(c, Expr::Filter(Filter::Text(_))));
            let mut windows = 0;
            for c in children {
                match c {
                    Expr::Filter(Filter::TextWindow(_)) => {
                        windows += 1;
                        if !has_text {
                            return Err((*seen, ParseErrorKind::OrphanTextWindow));
                        }
                        if windows > 1 {
                            let reason = "given more than once in one group";
                            return Err((*seen, ParseErrorKind::BadValue { key: "textwindow", reason }));
                        }
                        *seen += 1;
                    }
                    other => validate(other, seen)?,
                }
            }
            Ok(())
        }
    }
}
