use newsframe_core::labeler::{adjust_counts, confusion_stats, proportion_ci, ConfusionMatrix, LabelStats};

use crate::{within, Report};

#[test]
fn label_statistics() {
    let mut report = Report::new("label statistics");

    // Rows are human labels, columns model labels: male, female.
    let m = ConfusionMatrix::new(&[&[4058, 51], &[118, 1773]]).unwrap();
    let stats = confusion_stats(&m);
    let expect = [("male", 0.972, 0.988), ("female", 0.972, 0.938)];
    for (c, (name, p, r)) in expect.iter().enumerate() {
        let (gp, gr) = (stats.precision[c].unwrap(), stats.recall[c].unwrap());
        report.check(within(gp, *p, 0.0005), format!("{name} precision {gp:.5} = {p} +/- 0.0005"));
        report.check(within(gr, *r, 0.0005), format!("{name} recall {gr:.5} = {r} +/- 0.0005"));
    }

    let ci = proportion_ci(1891, 6000, 0.95).unwrap();
    report.check(within(ci.p * 100.0, 31.5, 0.1), format!("female share {:.3}% = 31.5% +/- 0.1 pp", ci.p * 100.0));
    report.check(
        within(ci.half_width * 100.0, 1.2, 0.1),
        format!("95% half-width {:.3} pp = 1.2 +/- 0.1 pp", ci.half_width * 100.0),
    );

    let raw = [178_400_000u64, 72_500_000];
    let adjusted = adjust_counts(&raw, &LabelStats::from_precisions(&[0.9717, 0.9720])).unwrap();
    let total: u64 = adjusted.iter().sum();
    report.check(total == raw.iter().sum::<u64>(), format!("total conserved: {total}"));
    let share = adjusted[1] as f64 / total as f64;
    report.check(
        (0.300..=0.305).contains(&share),
        format!("adjusted female share {:.2}% in [30.0%, 30.5%]", share * 100.0),
    );
    report.note(format!(
        "adjusted counts: male {:.1} M, female {:.1} M; a female figure of 76.5 M (30.4%) would \
         not conserve the 250.9 M total, so the error-rate formula is applied as stated",
        adjusted[0] as f64 / 1e6,
        adjusted[1] as f64 / 1e6
    ));

    let perfect = adjust_counts(&raw, &LabelStats::from_precisions(&[1.0, 1.0])).unwrap();
    report.check(perfect == raw, "precision 1.0 leaves counts unchanged");
    report.finish();
}
