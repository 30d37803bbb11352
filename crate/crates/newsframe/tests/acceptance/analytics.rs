//! Recovery of planted rates from a generated archive.

use newsframe::synth::{self, SynthConfig, CATCHPHRASE, GENDER_WORD, PERSON_OF_INTEREST, PERSON_WORD};
use newsframe_core::analytics::{
    event_coverage, group_share, hair_groups, person_word_association, screenhog, unique_words, weighted_age,
    word_gender_stats, Event, Scope,
};
use newsframe_core::archive::HairColor;
use newsframe_core::time::BucketUnit;
use newsframe_core::{ArchiveConfig, PersonId};

use crate::{heavy, within, Report};

#[test]
fn analytics_recovery() {
    let _guard = heavy();
    let mut report = Report::new("analytics recovery");
    let (a, truth) = synth::archive(&SynthConfig::analytics(7), ArchiveConfig::default()).unwrap();
    report.note(format!("{} videos, {} tokens, {} faces", truth.videos, truth.tokens, truth.faces));

    // Word and gender.
    let stats = word_gender_stats(&a, Scope::NewsContent);
    match stats.iter().find(|w| w.word == GENDER_WORD) {
        Some(w) => {
            report.check(within(w.p_female, 0.8, 0.02), format!("P(female | {GENDER_WORD}) {:.4} = 0.8 +/- 0.02", w.p_female));
            report.check(within(w.p_male, 0.2, 0.02), format!("P(male | {GENDER_WORD}) {:.4} = 0.2 +/- 0.02", w.p_male));
        }
        None => {
            report.check(false, format!("{GENDER_WORD} missing from word statistics"));
        }
    }

    // Person and word, against the all-utterance baseline.
    let person = a.person_id(PERSON_OF_INTEREST).unwrap();
    let assoc = person_word_association(&a, person, &[PERSON_WORD], BucketUnit::Month, Scope::NewsContent).unwrap();
    let (fraction, baseline) = (assoc.total.fraction(), assoc.total.baseline());
    report.check(within(fraction, 0.11, 0.01), format!("{PERSON_WORD} with {PERSON_OF_INTEREST} {fraction:.4} = 0.11 +/- 0.01"));
    report.check(within(baseline, 0.02, 0.01), format!("baseline {baseline:.4} = 0.02 +/- 0.01"));

    // A host's catchphrase.
    let planted = truth.word(CATCHPHRASE).unwrap();
    let host = a.person_id(planted.person.as_deref().unwrap()).unwrap();
    let words = unique_words(&a, host, 100, 0.0, Scope::NewsContent).unwrap();
    match words.iter().find(|w| w.word == CATCHPHRASE) {
        Some(w) => report.check(
            within(w.probability, planted.target, 0.02),
            format!("{CATCHPHRASE} with {} {:.4} = {} +/- 0.02", planted.person.as_deref().unwrap(), w.probability, planted.target),
        ),
        None => report.check(false, format!("{CATCHPHRASE} missing from unique words")),
    };

    // Screenhog.
    for h in &truth.hosts {
        let id = a.person_id(&h.host).unwrap();
        let s = screenhog(&a, id, &h.show, 10).unwrap();
        if h.target == synth::SceneParams::default().target_host_rate {
            report.check(
                within(s.fraction, 0.70, 0.01) && s.eligible,
                format!("{} on {} {:.4} = 0.70 +/- 0.01, eligible {}", h.host, h.show, s.fraction, s.eligible),
            );
        } else {
            report.check(within(s.fraction, h.target, 0.01), format!("{} on {} {:.4} = {} +/- 0.01", h.host, h.show, s.fraction, h.target));
        }
    }

    // Age mix per channel and month.
    let (mut age_points, mut age_bad) = (0, 0);
    for t in &truth.ages {
        let got = weighted_age(&a, &t.channel, BucketUnit::Month, Scope::NewsContent);
        age_points += 1;
        match got.iter().find(|p| p.bucket == t.bucket) {
            Some(p) if within(p.mean_age, t.mean_age(), 0.05) => {}
            other => {
                age_bad += 1;
                report.note(format!("{} {}: want {:.3}, got {:?}", t.channel, t.bucket, t.mean_age(), other.map(|p| p.mean_age)));
            }
        }
    }
    report.check(age_points > 0 && age_bad == 0, format!("weighted age within 0.05 y in {}/{age_points} channel-months", age_points - age_bad));

    // Hair color among female co-presenters.
    let hair = truth.hair.as_ref().unwrap();
    let domain: Vec<PersonId> = hair.blonde.iter().chain(&hair.brown).map(|n| a.person_id(n).unwrap()).collect();
    let groups = hair_groups(&a, &domain);
    let blonde = groups.iter().position(|(c, _)| *c == HairColor::Blonde).unwrap();
    let members: Vec<Vec<PersonId>> = groups.iter().map(|(_, m)| m.clone()).collect();
    let share = group_share(&a, &members, &domain, BucketUnit::Month, Scope::NewsContent);
    let (dom, blo): (u64, u64) = share.iter().fold((0, 0), |(d, b), p| (d + p.domain_millis, b + p.group_millis[blonde]));
    let pooled = blo as f64 / dom as f64;
    report.check(within(pooled, 0.6, 0.01), format!("blonde share {pooled:.4} = 0.6 +/- 0.01 (brown {:.4})", 1.0 - pooled));

    // Event coverage against the planted daily counts.
    let events: Vec<Event> = truth.events.iter().map(|e| e.event.clone()).collect();
    let window = synth::Plants::default().event_window;
    let series = event_coverage(&a, &events, window, Scope::All).unwrap();
    let exact = truth.events.iter().zip(&series).filter(|(t, s)| t.daily == s.daily).count();
    report.check(
        !events.is_empty() && exact == events.len(),
        format!("event coverage exact for {exact}/{} events", events.len()),
    );

    let secs = report.elapsed_secs();
    report.check(secs < 300.0, format!("runtime {secs:.1} s < 300 s"));
    report.finish();
}
