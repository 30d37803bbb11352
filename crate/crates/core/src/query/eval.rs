//! Evaluation of filter expressions to per-video interval sets.
//!
//! Leaves select time within a video; AND intersects and OR unions. Two
//! filters are modifiers of the AND group they sit in (and of groups nested
//! inside it): `textwindow` widens text matches, and `commercials` chooses
//! whether leaves are restricted to news content. Masking is the default;
//! videos without a commercial mask contribute nothing to masked leaves.

use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Commercials, Expr, Filter, HourRange, Tag};
use crate::archive::{Archive, Gender, PersonId, TermId, VideoMeta};
use crate::interval::{Interval, IntervalSet, Millis, VideoId};
use crate::time::HOUR_MS;

/// Per-video results for the videos a query was evaluated over.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evaluation {
    /// One canonical set per in-scope video, in archive order.
    pub sets: Vec<IntervalSet>,
    /// Non-fatal problems, e.g. names that match no known person.
    pub warnings: Vec<String>,
}

impl Evaluation {
    pub fn duration_sum(&self) -> u64 {
        self.sets.iter().map(IntervalSet::duration_sum).sum()
    }

    pub fn scope(&self) -> impl Iterator<Item = VideoId> + '_ {
        self.sets.iter().map(IntervalSet::video)
    }

    pub fn non_empty(&self) -> impl Iterator<Item = &IntervalSet> {
        self.sets.iter().filter(|s| !s.is_empty())
    }
}

#[derive(Clone, Copy, Debug)]
struct Context {
    mask: bool,
    window: Option<Millis>,
}

/// The expression with names and phrases resolved against one archive.
enum Plan {
    Select(Leaf),
    /// Modifiers evaluate to the whole video (the identity for AND).
    All,
    And { children: Vec<Plan>, mask: Option<bool>, window: Option<Millis> },
    Or(Vec<Plan>),
}

enum Leaf {
    Persons(Vec<PersonId>),
    Gender(Gender),
    Presenters,
    /// Each phrase as term ids; phrases with unknown words are dropped.
    Text(Vec<Vec<TermId>>),
    Channel(Vec<String>),
    Show(Vec<String>),
    Hour(HourRange),
}

pub fn eval(archive: &Archive, expr: &Expr) -> Evaluation {
    eval_where(archive, expr, |_| true)
}

/// Evaluates over the videos whose metadata satisfies `in_scope`.
pub fn eval_where(archive: &Archive, expr: &Expr, mut in_scope: impl FnMut(&VideoMeta) -> bool) -> Evaluation {
    let mut warnings = Vec::new();
    let plan = compile(archive, expr, &mut warnings);
    let root = Context { mask: true, window: None };
    let sets = archive
        .video_ids()
        .filter(|&v| in_scope(archive.video(v).expect("video exists")))
        .map(|v| run(archive, v, &plan, root))
        .collect();
    Evaluation { sets, warnings }
}

fn compile(archive: &Archive, expr: &Expr, warnings: &mut Vec<String>) -> Plan {
    match expr {
        Expr::Or(children) => Plan::Or(children.iter().map(|c| compile(archive, c, warnings)).collect()),
        Expr::And(children) => {
            let mut mask = None;
            let mut window = None;
            for c in children {
                match c {
                    Expr::Filter(Filter::Commercials(mode)) => mask = Some(*mode == Commercials::Exclude),
                    Expr::Filter(Filter::TextWindow(w)) => window = Some(*w),
                    _ => {}
                }
            }
            let children = children
                .iter()
                .filter(|c| !matches!(c, Expr::Filter(f) if f.is_modifier()))
                .map(|c| compile(archive, c, warnings))
                .collect();
            Plan::And { children, mask, window }
        }
        Expr::Filter(filter) => compile_filter(archive, filter, warnings),
    }
}

fn compile_filter(archive: &Archive, filter: &Filter, warnings: &mut Vec<String>) -> Plan {
    let leaf = match filter {
        Filter::Name(names) => {
            let mut ids = Vec::new();
            for n in names {
                match archive.person_id(n) {
                    Some(id) => ids.push(id),
                    None => warnings.push(alloc::format!("unknown person {n:?}")),
                }
            }
            Leaf::Persons(ids)
        }
        Filter::Tag(tags) => {
            let leaves: Vec<Plan> = tags
                .iter()
                .map(|t| {
                    Plan::Select(match t {
                        Tag::Male => Leaf::Gender(Gender::Male),
                        Tag::Female => Leaf::Gender(Gender::Female),
                        Tag::Presenter => Leaf::Presenters,
                    })
                })
                .collect();
            return if leaves.len() == 1 { leaves.into_iter().next().expect("one") } else { Plan::Or(leaves) };
        }
        Filter::Text(phrases) => Leaf::Text(
            phrases
                .iter()
                .filter_map(|p| archive.phrase_terms(&p.split(' ').collect::<Vec<_>>()))
                .collect(),
        ),
        Filter::Channel(c) => Leaf::Channel(c.clone()),
        Filter::Show(s) => Leaf::Show(s.clone()),
        Filter::Hour(h) => Leaf::Hour(*h),
        Filter::TextWindow(_) | Filter::Commercials(_) => return Plan::All,
    };
    Plan::Select(leaf)
}

fn run(archive: &Archive, video: VideoId, plan: &Plan, ctx: Context) -> IntervalSet {
    match plan {
        Plan::Select(leaf) => {
            let raw = select(archive, video, leaf, ctx);
            restrict(archive, video, &raw, ctx)
        }
        Plan::All => restrict(archive, video, &archive.full_video(video), ctx),
        Plan::And { children, mask, window } => {
            let ctx = Context { mask: mask.unwrap_or(ctx.mask), window: window.or(ctx.window) };
            let mut acc: Option<IntervalSet> = None;
            for c in children {
                let next = run(archive, video, c, ctx);
                acc = Some(match acc {
                    None => next,
                    Some(prev) => prev.intersect(&next).expect("same video"),
                });
                if acc.as_ref().is_some_and(IntervalSet::is_empty) {
                    break;
                }
            }
            acc.unwrap_or_else(|| restrict(archive, video, &archive.full_video(video), ctx))
        }
        Plan::Or(children) => {
            let mut acc = IntervalSet::empty(video);
            for c in children {
                acc = acc.union(&run(archive, video, c, ctx)).expect("same video");
            }
            acc
        }
    }
}

fn restrict(archive: &Archive, video: VideoId, raw: &IntervalSet, ctx: Context) -> IntervalSet {
    if raw.is_empty() {
        return IntervalSet::empty(video);
    }
    if ctx.mask {
        match archive.news_content(video) {
            Some(news) => raw.intersect(news).expect("same video"),
            None => IntervalSet::empty(video),
        }
    } else {
        raw.clip_to(archive.video(video).expect("video exists").duration).canonicalize()
    }
}

fn select(archive: &Archive, video: VideoId, leaf: &Leaf, ctx: Context) -> IntervalSet {
    let meta = archive.video(video).expect("video exists");
    match leaf {
        Leaf::Persons(ids) => {
            let mut acc = IntervalSet::empty(video);
            for &id in ids {
                if let Some(set) = archive.identity_set_ref(video, id) {
                    acc = acc.union(set).expect("same video");
                }
            }
            acc
        }
        Leaf::Gender(g) => archive.gender_set(video, *g).clone(),
        Leaf::Presenters => archive.presenter_set(video).clone(),
        Leaf::Text(phrases) => {
            let mut spans = Vec::new();
            for terms in phrases {
                for m in archive.find_term_phrase_in(video, terms) {
                    let extent = archive.match_extent(&m);
                    spans.push(match ctx.window {
                        Some(w) => widen(extent, w, meta.duration),
                        None => extent,
                    });
                }
            }
            IntervalSet::canonical(video, spans).expect("extents are well formed")
        }
        Leaf::Channel(names) => whole_if(archive, video, names.iter().any(|c| c.eq_ignore_ascii_case(&meta.channel))),
        Leaf::Show(names) => whole_if(archive, video, names.iter().any(|s| s.eq_ignore_ascii_case(&meta.show))),
        Leaf::Hour(range) => hour_set(archive, video, *range),
    }
}

fn whole_if(archive: &Archive, video: VideoId, cond: bool) -> IntervalSet {
    if cond {
        archive.full_video(video)
    } else {
        IntervalSet::empty(video)
    }
}

/// Window of `width` centered on the midpoint of `extent`, clamped to the video.
pub fn widen(extent: Interval, width: Millis, duration: Millis) -> Interval {
    let mid = (u64::from(extent.start) + u64::from(extent.end)) / 2;
    let start = mid.saturating_sub(u64::from(width / 2));
    let end = (start + u64::from(width)).min(u64::from(duration));
    Interval::new(start.min(end) as u32, end as u32)
}

/// Portions of the video airing inside the local-hour range. The clock offset
/// in effect at air time applies to the whole video.
fn hour_set(archive: &Archive, video: VideoId, range: HourRange) -> IntervalSet {
    let meta = archive.video(video).expect("video exists");
    let local_start = archive.config().clock.local_ms(meta.air_utc);
    let duration = i64::from(meta.duration);
    let mut spans = Vec::new();
    let mut offset = 0i64;
    while offset < duration {
        let local = local_start + offset;
        let hour_end = (local.div_euclid(HOUR_MS) + 1) * HOUR_MS;
        let piece_end = (hour_end - local_start).min(duration);
        let hour = (local.rem_euclid(86_400_000) / HOUR_MS) as u32;
        if range.contains(hour) {
            spans.push(Interval::new(offset as u32, piece_end as u32));
        }
        offset = piece_end;
    }
    IntervalSet::canonical(video, spans).expect("well formed")
}

/// Text of the tokens overlapping `[start - pad, end + pad]`.
pub fn snippet(archive: &Archive, video: VideoId, interval: Interval, pad: Millis) -> String {
    let lo = interval.start.saturating_sub(pad);
    let hi = interval.end.saturating_add(pad);
    let mut out = String::new();
    for t in archive.tokens(video).iter().filter(|t| t.t0 <= hi && t.t1 >= lo) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(archive.word_text(t.word));
    }
    out
}
