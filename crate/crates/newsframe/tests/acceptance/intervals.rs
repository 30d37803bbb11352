//! Interval algebra against a brute-force oracle that works on 10 ms cells.

use newsframe_core::{Interval, IntervalSet, Merge, Predicate, VideoId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Report;

const CELL: u32 = 10;
const CELLS: usize = 300;
const CASES: usize = 1_000;
const V: VideoId = VideoId(0);

type Cells = Vec<bool>;

fn random_cells(rng: &mut ChaCha8Rng) -> Cells {
    // Runs of random length so both short gaps and long spans occur.
    let mut cells = vec![false; CELLS];
    let mut i = 0;
    let mut on = rng.gen_bool(0.5);
    while i < CELLS {
        let run = rng.gen_range(1..=40).min(CELLS - i);
        cells[i..i + run].fill(on);
        i += run;
        on = !on;
    }
    if rng.gen_ratio(1, 20) {
        cells.fill(false);
    }
    cells
}

/// Maximal runs of set cells, as millisecond intervals.
fn runs(cells: &[bool]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        if cells[i] {
            let s = i;
            while i < cells.len() && cells[i] {
                i += 1;
            }
            out.push((s as u32 * CELL, i as u32 * CELL));
        } else {
            i += 1;
        }
    }
    out
}

fn paint(intervals: &[(u32, u32)]) -> Cells {
    let mut cells = vec![false; CELLS];
    for &(s, e) in intervals {
        for c in s / CELL..e / CELL {
            cells[c as usize] = true;
        }
    }
    cells
}

fn to_set(cells: &[bool]) -> IntervalSet {
    IntervalSet::new(V, runs(cells).into_iter().map(|(s, e)| Interval::new(s, e)).collect()).expect("canonical input")
}

fn pairs(set: &IntervalSet) -> Vec<(u32, u32)> {
    set.iter().map(|iv| (iv.start, iv.end)).collect()
}

fn overlaps(a: (u32, u32), b: (u32, u32)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

fn before_or_after(a: (u32, u32), b: (u32, u32), max_gap: u32) -> bool {
    (a.1 <= b.0 && b.0 - a.1 < max_gap) || (b.1 <= a.0 && a.0 - b.1 < max_gap)
}

fn oracle_coalesce(cells: &[bool], max_gap: u32) -> Vec<(u32, u32)> {
    let r = runs(cells);
    let mut out: Vec<(u32, u32)> = Vec::new();
    for iv in r {
        match out.last_mut() {
            Some(last) if iv.0 - last.1 < max_gap => last.1 = iv.1,
            _ => out.push(iv),
        }
    }
    out
}

#[test]
fn interval_algebra_matches_grid_oracle() {
    let mut report = Report::new("interval algebra vs 10 ms grid oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(0x1_2024);
    let ops = [
        "union",
        "intersect",
        "minus",
        "coalesce",
        "filter_length",
        "join overlaps/intersection",
        "join overlaps/span",
        "join before_or_after/span",
        "filter_against overlaps",
        "filter_against before_or_after",
        "duration_sum",
        "contains",
    ];
    let mut mismatches = vec![0usize; ops.len()];
    let mut law_failures = 0usize;
    let mut non_canonical = 0usize;
    for _ in 0..CASES {
        let (ca, cb, cc) = (random_cells(&mut rng), random_cells(&mut rng), random_cells(&mut rng));
        let (a, b, c) = (to_set(&ca), to_set(&cb), to_set(&cc));
        let (ra, rb) = (runs(&ca), runs(&cb));
        let gap = rng.gen_range(1..=30) * CELL;

        let zip = |f: fn(bool, bool) -> bool| -> Cells { ca.iter().zip(&cb).map(|(&x, &y)| f(x, y)).collect() };
        let results = [
            (pairs(&a.union(&b).unwrap()), runs(&zip(|x, y| x || y))),
            (pairs(&a.intersect(&b).unwrap()), runs(&zip(|x, y| x && y))),
            (pairs(&a.minus(&b).unwrap()), runs(&zip(|x, y| x && !y))),
            (pairs(&a.coalesce(gap)), oracle_coalesce(&ca, gap)),
            (pairs(&a.filter_length(Some(gap), Some(gap * 3))), {
                ra.iter().copied().filter(|iv| iv.1 - iv.0 > gap && iv.1 - iv.0 < gap * 3).collect()
            }),
        ];
        for (i, (got, want)) in results.iter().enumerate() {
            if got != want {
                mismatches[i] += 1;
            }
        }

        let join_oracle = |pred: &dyn Fn((u32, u32), (u32, u32)) -> bool, span: bool| -> Vec<(u32, u32)> {
            let mut merged = Vec::new();
            for &x in &ra {
                for &y in &rb {
                    if pred(x, y) {
                        merged.push(if span { (x.0.min(y.0), x.1.max(y.1)) } else { (x.0.max(y.0), x.1.min(y.1)) });
                    }
                }
            }
            runs(&paint(&merged))
        };
        let joins = [
            (a.join(&b, Predicate::Overlaps, Merge::Intersection).unwrap(), join_oracle(&overlaps, false)),
            (a.join(&b, Predicate::Overlaps, Merge::Span).unwrap(), join_oracle(&overlaps, true)),
            (
                a.join(&b, Predicate::BeforeOrAfter { max_gap: gap }, Merge::Span).unwrap(),
                join_oracle(&|x, y| before_or_after(x, y, gap), true),
            ),
        ];
        for (k, (got, want)) in joins.iter().enumerate() {
            non_canonical += usize::from(!got.is_canonical());
            if pairs(got) != *want {
                mismatches[5 + k] += 1;
            }
        }

        let against = |pred: &dyn Fn((u32, u32), (u32, u32)) -> bool| -> Vec<(u32, u32)> {
            ra.iter().copied().filter(|&x| rb.iter().any(|&y| pred(x, y))).collect()
        };
        if pairs(&a.filter_against(&b, Predicate::Overlaps).unwrap()) != against(&overlaps) {
            mismatches[8] += 1;
        }
        let g = Predicate::BeforeOrAfter { max_gap: gap };
        if pairs(&a.filter_against(&b, g).unwrap()) != against(&|x, y| before_or_after(x, y, gap)) {
            mismatches[9] += 1;
        }
        if a.duration_sum() != ca.iter().filter(|&&x| x).count() as u64 * u64::from(CELL) {
            mismatches[10] += 1;
        }
        let t = rng.gen_range(0..CELLS as u32 * CELL);
        if a.contains(t) != ca[(t / CELL) as usize] {
            mismatches[11] += 1;
        }

        // Laws, with the whole video [0, end) as the universe.
        let full = IntervalSet::span(V, 0, CELLS as u32 * CELL);
        let u = |x: &IntervalSet, y: &IntervalSet| x.union(y).unwrap();
        let n = |x: &IntervalSet, y: &IntervalSet| x.intersect(y).unwrap();
        let m = |x: &IntervalSet, y: &IntervalSet| x.minus(y).unwrap();
        let laws = [
            u(&a, &b) == u(&b, &a),
            n(&a, &b) == n(&b, &a),
            u(&u(&a, &b), &c) == u(&a, &u(&b, &c)),
            n(&n(&a, &b), &c) == n(&a, &n(&b, &c)),
            u(&a, &a) == a && n(&a, &a) == a,
            m(&a, &b) == n(&a, &m(&full, &b)),
            m(&full, &u(&a, &b)) == n(&m(&full, &a), &m(&full, &b)),
            m(&full, &n(&a, &b)) == u(&m(&full, &a), &m(&full, &b)),
            n(&a, &u(&b, &c)) == u(&n(&a, &b), &n(&a, &c)),
        ];
        law_failures += laws.iter().filter(|ok| !**ok).count();
    }
    for (op, bad) in ops.iter().zip(&mismatches) {
        report.check(*bad == 0, format!("{op}: {bad} mismatches in {CASES} cases"));
    }
    report.check(non_canonical == 0, format!("join results canonical ({non_canonical} not)"));
    report.check(law_failures == 0, format!("algebraic laws: {law_failures} failures over {CASES} triples"));
    let secs = report.elapsed_secs();
    report.check(secs < 60.0, format!("runtime {secs:.2} s < 60 s"));
    report.finish();
}
