use newsframe::synth::{self, SynthConfig};
use newsframe_core::archive::Token;
use newsframe_core::detectors::{CommercialOutcome, LuminanceSample};
use newsframe_core::{Archive, ArchiveBuilder, ArchiveConfig, Interval, IntervalSet, VideoMeta};

use crate::{heavy, Report};

/// Ten minutes of uppercase news with `>>` markers, except for a 120 s block
/// of mixed-case captions bracketed by one-second black frames.
fn lowercase_block() -> (Archive, Interval) {
    let mut b = ArchiveBuilder::new();
    let v = b
        .add_video(VideoMeta {
            name: "block".into(),
            channel: "CNN".into(),
            show: "Test".into(),
            air_utc: 1_500_000_000_000,
            duration: 600_000,
        })
        .unwrap();
    let black = [(240_000, 241_000), (361_000, 362_000)];
    let block = Interval::new(241_000, 361_000);
    let (upper, arrows, lower) = (b.intern_word("NEWS"), b.intern_word(">>"), b.intern_word("Buy"));
    let mut seq = 0;
    for t in (0..600_000).step_by(500) {
        let word = if block.contains(t) {
            lower
        } else if black.iter().any(|&(s, e)| (s..e).contains(&t)) {
            continue;
        } else if t % 5_000 == 0 {
            arrows
        } else {
            upper
        };
        b.add_token(v, Token { word, seq, t0: t, t1: t + 400 }).unwrap();
        seq += 1;
    }
    for t in (0..600_000).step_by(500) {
        let dark = black.iter().any(|&(s, e)| (s..e).contains(&t));
        b.add_luminance(v, LuminanceSample { t, value: if dark { 0.0 } else { 0.5 } }).unwrap();
    }
    (b.build(ArchiveConfig::default()).unwrap(), block)
}

#[test]
fn commercial_detector_precision_recall() {
    let mut report = Report::new("commercial detector");

    let (a, block) = lowercase_block();
    let v = a.video_by_name("block").unwrap();
    let got = a.commercials(v).mask().cloned();
    report.check(
        got == Some(IntervalSet::new(v, vec![block]).unwrap()),
        format!("120 s lowercase block detected as exactly [{}, {}): got {got:?}", block.start, block.end),
    );

    let _guard = heavy();
    let cfg = SynthConfig::commercials(225, 225);
    let (a, truth) = synth::archive(&cfg, ArchiveConfig::default()).unwrap();
    let hours = a.videos().iter().map(|m| u64::from(m.duration)).sum::<u64>() as f64 / 3.6e6;
    report.check(hours >= 225.0, format!("archive covers {hours:.0} h"));
    let (mut tp, mut detected, mut planted, mut breaks) = (0u64, 0u64, 0u64, 0usize);
    for v in &truth.commercials {
        let id = a.video_by_name(&v.video).unwrap();
        let truth_set =
            IntervalSet::new(id, v.spans.iter().map(|s| Interval::new(s[0], s[1])).collect()).unwrap();
        breaks += v.spans.len();
        let found = match a.commercials(id) {
            CommercialOutcome::Detected(set) => set.clone(),
            CommercialOutcome::Unknown => IntervalSet::empty(id),
        };
        tp += found.intersect(&truth_set).unwrap().duration_sum();
        detected += found.duration_sum();
        planted += truth_set.duration_sum();
    }
    let precision = tp as f64 / detected as f64;
    let recall = tp as f64 / planted as f64;
    report.note(format!(
        "{breaks} planted breaks, {:.1} h planted, {:.1} h detected (time-weighted)",
        planted as f64 / 3.6e6,
        detected as f64 / 3.6e6
    ));
    report.check(precision >= 0.95, format!("precision {precision:.4} >= 0.95"));
    report.check(recall >= 0.95, format!("recall {recall:.4} >= 0.95"));
    report.finish();
}
