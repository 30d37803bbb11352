use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{air_utc, Scope};
use crate::archive::{Archive, HairColor, PersonId};
use crate::error::AnalyticsError;
use crate::interval::IntervalSet;
use crate::time::{split_into_buckets, utc_date, BucketUnit, UtcMillis};

pub const DEFAULT_MIN_SHOW_HOURS: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Screenhog {
    pub presenter_millis: u64,
    pub show_millis: u64,
    pub fraction: f64,
    /// Whether the show has at least the required hours of news content.
    pub eligible: bool,
}

/// Share of a show's news content with the presenter on screen.
pub fn screenhog(
    archive: &Archive,
    presenter: PersonId,
    show: &str,
    min_show_hours: u32,
) -> Result<Screenhog, AnalyticsError> {
    if archive.person(presenter).is_none() {
        return Err(AnalyticsError::UnknownPerson(alloc::format!("#{}", presenter.0)));
    }
    let (mut on, mut total) = (0u64, 0u64);
    for video in archive.video_ids() {
        if archive.video(video).expect("video exists").show != show {
            continue;
        }
        let Some(news) = archive.news_content(video) else { continue };
        total += news.duration_sum();
        if let Some(set) = archive.identity_set_ref(video, presenter) {
            on += set.intersect(news).expect("same video").duration_sum();
        }
    }
    let fraction = if total == 0 { 0.0 } else { on as f64 / total as f64 };
    Ok(Screenhog {
        presenter_millis: on,
        show_millis: total,
        fraction,
        eligible: total >= u64::from(min_show_hours) * 3_600_000,
    })
}

/// Age in years on `on`, counting the fraction of the current year of life
/// by days.
pub fn age_years(birth: NaiveDate, on: NaiveDate) -> f64 {
    let anniversary = |years: i32| {
        let y = birth.year() + years;
        birth.with_year(y).unwrap_or_else(|| NaiveDate::from_ymd_opt(y, 3, 1).expect("valid date"))
    };
    let mut years = on.year() - birth.year();
    if anniversary(years) > on {
        years -= 1;
    }
    let last = anniversary(years);
    let next = anniversary(years + 1);
    f64::from(years) + (on - last).num_days() as f64 / (next - last).num_days() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgePoint {
    pub bucket: NaiveDate,
    /// Screen time weighted mean age.
    pub mean_age: f64,
    pub millis: u64,
}

fn add_to_buckets(archive: &Archive, set: &IntervalSet, unit: BucketUnit, mut visit: impl FnMut(NaiveDate, u64)) {
    let air = air_utc(archive, set.video());
    for iv in set.iter() {
        split_into_buckets(unit, air + UtcMillis::from(iv.start), air + UtcMillis::from(iv.end), &mut visit);
    }
}

/// Mean age of a channel's presenters weighted by their screen time, per
/// bucket. Presenters without a birthdate are ignored. Each presenter's age
/// is taken on the video's air date.
pub fn weighted_age(archive: &Archive, channel: &str, unit: BucketUnit, scope: Scope) -> Vec<AgePoint> {
    let mut acc: BTreeMap<NaiveDate, (f64, u64)> = BTreeMap::new();
    for video in archive.video_ids() {
        let meta = archive.video(video).expect("video exists");
        if meta.channel != channel || !scope.covers(archive, video) {
            continue;
        }
        let air_date = utc_date(meta.air_utc);
        for (person, set) in archive.identities_in(video) {
            let p = archive.person(*person).expect("person exists");
            let Some(birth) = p.birthdate.filter(|_| p.presents_on(channel)) else { continue };
            let age = age_years(birth, air_date);
            add_to_buckets(archive, &scope.restrict(archive, set), unit, |bucket, ms| {
                let e = acc.entry(bucket).or_default();
                e.0 += age * ms as f64;
                e.1 += ms;
            });
        }
    }
    acc.into_iter()
        .filter(|(_, (_, ms))| *ms > 0)
        .map(|(bucket, (weighted, ms))| AgePoint { bucket, mean_age: weighted / ms as f64, millis: ms })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharePoint {
    pub bucket: NaiveDate,
    pub domain_millis: u64,
    /// Indexed like the groups argument.
    pub group_millis: Vec<u64>,
}

impl SharePoint {
    pub fn share(&self, group: usize) -> f64 {
        if self.domain_millis == 0 {
            0.0
        } else {
            self.group_millis[group] as f64 / self.domain_millis as f64
        }
    }
}

/// Per bucket, the screen time of each group (the union of its members'
/// intervals, within the domain) as a share of the domain's screen time.
pub fn group_share(
    archive: &Archive,
    groups: &[Vec<PersonId>],
    domain: &[PersonId],
    unit: BucketUnit,
    scope: Scope,
) -> Vec<SharePoint> {
    let mut in_domain = alloc::vec![false; archive.persons().len()];
    for p in domain {
        if let Some(slot) = in_domain.get_mut(p.index()) {
            *slot = true;
        }
    }
    let mut acc: BTreeMap<NaiveDate, (u64, Vec<u64>)> = BTreeMap::new();
    let zero = || (0u64, alloc::vec![0u64; groups.len()]);
    for video in archive.video_ids() {
        if !scope.covers(archive, video) {
            continue;
        }
        let identities = archive.identities_in(video);
        let union_of = |keep: &dyn Fn(PersonId) -> bool| -> IntervalSet {
            let mut out = IntervalSet::empty(video);
            for (_, set) in identities.iter().filter(|(p, _)| keep(*p)) {
                out = out.union(set).expect("same video");
            }
            out
        };
        let domain_set = scope.restrict(archive, &union_of(&|p| in_domain[p.index()]));
        if domain_set.is_empty() {
            continue;
        }
        add_to_buckets(archive, &domain_set, unit, |bucket, ms| {
            acc.entry(bucket).or_insert_with(zero).0 += ms;
        });
        for (g, members) in groups.iter().enumerate() {
            let set = union_of(&|p| members.contains(&p)).intersect(&domain_set).expect("same video");
            add_to_buckets(archive, &set, unit, |bucket, ms| {
                acc.entry(bucket).or_insert_with(zero).1[g] += ms;
            });
        }
    }
    acc.into_iter()
        .map(|(bucket, (domain_millis, group_millis))| SharePoint { bucket, domain_millis, group_millis })
        .collect()
}

/// Partitions `domain` by recorded hair color; persons without one are left out.
pub fn hair_groups(archive: &Archive, domain: &[PersonId]) -> Vec<(HairColor, Vec<PersonId>)> {
    let mut by_color: BTreeMap<HairColor, Vec<PersonId>> = BTreeMap::new();
    for &p in domain {
        if let Some(hair) = archive.person(p).and_then(|p| p.hair) {
            by_color.entry(hair).or_default().push(p);
        }
    }
    by_color.into_iter().collect()
}
