use newsframe::synth::{self, PlantedInterview, SynthConfig};
use newsframe_core::archive::{FaceEvent, IdentityLabel, Person};
use newsframe_core::detectors::{detect_interviews, InterviewParams};
use newsframe_core::{ArchiveBuilder, ArchiveConfig, Gender, Interval, VideoMeta};

use crate::Report;

/// Who is on screen during one 3 s sample.
#[derive(Clone, Copy)]
enum Shot {
    Both,
    Guest,
    Host,
}

/// Runs the detector over a video whose samples from 60 s on follow `shots`.
fn detect(shots: &[Shot]) -> Vec<Interval> {
    let mut b = ArchiveBuilder::new();
    let v = b
        .add_video(VideoMeta {
            name: "v".into(),
            channel: "CNN".into(),
            show: "S".into(),
            air_utc: 1_500_000_000_000,
            duration: 1_800_000,
        })
        .unwrap();
    let host = b.add_person(Person { presenter_on: vec!["CNN".into()], ..Person::named("Host") }).unwrap();
    let guest = b.add_person(Person::named("Guest")).unwrap();
    let face = |t, person, x: f32| FaceEvent {
        video: v,
        t,
        bbox: [x, 0.1, x + 0.3, 0.6],
        gender: Gender::Male,
        gender_score: 1.0,
        identity: Some(IdentityLabel { person, score: 1.0 }),
        descriptor: None,
    };
    for (i, shot) in shots.iter().enumerate() {
        let t = 60_000 + 3_000 * i as u32;
        if matches!(shot, Shot::Both | Shot::Host) {
            b.add_face(face(t, host, 0.1)).unwrap();
        }
        if matches!(shot, Shot::Both | Shot::Guest) {
            b.add_face(face(t, guest, 0.5)).unwrap();
        }
    }
    let a = b.build(ArchiveConfig::default()).unwrap();
    detect_interviews(&a, v, "Guest", &["Host"], &InterviewParams::default()).unwrap().iter().copied().collect()
}

/// Two-shot opening, then guest-alone stretches interleaved with host cutaways,
/// `samples` long in total and ending on the guest.
fn alternating(samples: usize) -> Vec<Shot> {
    let mut shots = vec![Shot::Both; 10];
    while shots.len() < samples {
        let guest = 15.min(samples - shots.len());
        shots.extend(std::iter::repeat_n(Shot::Guest, guest));
        if shots.len() + 3 + 5 <= samples {
            shots.extend([Shot::Host; 3]);
        }
    }
    shots
}

fn iou(a: &PlantedInterview, b: &PlantedInterview) -> f64 {
    let inter = a.end_ms.min(b.end_ms).saturating_sub(a.start_ms.max(b.start_ms));
    let union = a.end_ms.max(b.end_ms) - a.start_ms.min(b.start_ms);
    f64::from(inter) / f64::from(union)
}

#[test]
fn interview_detector() {
    let mut report = Report::new("interview detector");
    let six = detect(&alternating(120));
    report.check(
        six == [Interval::new(60_000, 420_000)],
        format!("6 min alternating pattern detected as [60000, 420000): {six:?}"),
    );
    let three = detect(&alternating(60));
    report.check(three.is_empty(), format!("3 min pattern rejected: {three:?}"));
    let at = detect(&alternating(80));
    report.check(at.len() == 1 && at[0].len() == 240_000, format!("exactly 240 s accepted: {at:?}"));
    let under = detect(&alternating(79));
    report.check(under.is_empty(), format!("237 s rejected: {under:?}"));

    let (a, truth) = synth::archive(&SynthConfig::interviews(31), ArchiveConfig::default()).unwrap();
    let guests: Vec<String> = {
        let mut g: Vec<String> = truth.interviews.iter().chain(&truth.decoys).map(|i| i.guest.clone()).collect();
        g.sort();
        g.dedup();
        g
    };
    let mut found = Vec::new();
    for (id, meta) in a.video_ids().zip(a.videos()) {
        let host = a
            .persons()
            .iter()
            .find(|p| p.presents_on(&meta.channel) && truth.interviews.iter().chain(&truth.decoys).any(|i| i.video == meta.name && i.host == p.name))
            .map(|p| p.name.clone());
        let Some(host) = host else { continue };
        for g in &guests {
            for iv in &detect_interviews(&a, id, g, &[host.as_str()], &InterviewParams::default()).unwrap() {
                found.push(PlantedInterview {
                    video: meta.name.clone(),
                    guest: g.clone(),
                    host: host.clone(),
                    start_ms: iv.start,
                    end_ms: iv.end,
                });
            }
        }
    }
    let mut used = vec![false; truth.interviews.len()];
    let mut tp = 0usize;
    for f in &found {
        let hit = truth
            .interviews
            .iter()
            .enumerate()
            .find(|(i, t)| !used[*i] && t.video == f.video && t.guest == f.guest && iou(t, f) >= 0.5);
        if let Some((i, _)) = hit {
            used[i] = true;
            tp += 1;
        }
    }
    let precision = tp as f64 / found.len().max(1) as f64;
    let recall = tp as f64 / truth.interviews.len().max(1) as f64;
    report.note(format!(
        "{} planted interviews, {} decoys, {} detections",
        truth.interviews.len(),
        truth.decoys.len(),
        found.len()
    ));
    report.check(truth.interviews.len() >= 50, format!("{} planted interviews >= 50", truth.interviews.len()));
    report.check(precision >= 0.90, format!("precision {precision:.3} >= 0.90 (IoU >= 0.5)"));
    report.check(recall >= 0.90, format!("recall {recall:.3} >= 0.90 (IoU >= 0.5)"));
    report.finish();
}
