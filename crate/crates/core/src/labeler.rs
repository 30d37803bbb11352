//! Descriptor-space labeling kernels and label-quality arithmetic.
//!
//! All nearest-neighbour searches are exact scans under Euclidean distance.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::archive::{DescriptorStore, FaceEvent, IdentityLabel, PersonId};
use crate::error::LabelError;

pub const DEFAULT_K: usize = 7;
pub const DEFAULT_PROPAGATION_THRESHOLD: f64 = 0.7;

pub fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

pub fn distance(a: &[f32], b: &[f32]) -> f64 {
    libm::sqrt(squared_distance(a, b))
}

/// Indices of the `k` training points nearest `query`, ordered by
/// (distance, index).
pub fn nearest<'a, L>(query: &[f32], train: &'a [(&'a [f32], L)], k: usize) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> =
        train.iter().enumerate().map(|(i, (d, _))| (i, squared_distance(query, d))).collect();
    let k = k.min(scored.len());
    let by_distance = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < scored.len() {
        scored.select_nth_unstable_by(k, by_distance);
        scored.truncate(k);
    }
    scored.sort_by(by_distance);
    scored
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vote<L> {
    pub label: L,
    /// Share of the k neighbours carrying `label`.
    pub fraction: f64,
}

/// Majority label among the `k` nearest training points.
///
/// Ties on vote count go to the label with the smaller summed distance; an
/// exact tie goes to the label whose nearest member comes first in
/// (distance, index) order.
pub fn knn_classify<L: Copy + PartialEq>(query: &[f32], train: &[(&[f32], L)], k: usize) -> Result<Vote<L>, LabelError> {
    if train.is_empty() {
        return Err(LabelError::EmptyTrainingSet);
    }
    if k == 0 || k > train.len() {
        return Err(LabelError::InvalidK { k, available: train.len() });
    }
    let neighbours = nearest(query, train, k);
    // (label, votes, summed distance), in order of first appearance.
    let mut tally: Vec<(L, usize, f64)> = Vec::new();
    for &(i, sq) in &neighbours {
        let label = train[i].1;
        let d = libm::sqrt(sq);
        match tally.iter_mut().find(|(l, _, _)| *l == label) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += d;
            }
            None => tally.push((label, 1, d)),
        }
    }
    let mut best = 0;
    for (i, entry) in tally.iter().enumerate().skip(1) {
        let cur = &tally[best];
        if entry.1 > cur.1 || (entry.1 == cur.1 && entry.2 < cur.2) {
            best = i;
        }
    }
    Ok(Vote { label: tally[best].0, fraction: tally[best].1 as f64 / k as f64 })
}

/// Label of the single nearest exemplar for every face.
pub fn nn_cluster_assign<L: Copy>(faces: &[&[f32]], exemplars: &[(&[f32], L)]) -> Result<Vec<L>, LabelError> {
    if exemplars.is_empty() {
        return Err(LabelError::NoExemplars);
    }
    Ok(faces.iter().map(|f| exemplars[nearest(f, exemplars, 1)[0].0].1).collect())
}

/// Adds identity labels to unlabelled faces.
///
/// Within each video, an unidentified face takes identity X when its
/// nearest identified descriptor belongs to X at distance strictly below
/// `threshold`. Existing labels are never replaced and labels never cross
/// videos. Faces without descriptors are left alone. Returns the augmented
/// faces plus the indices (into `faces`) that gained a label.
pub fn propagate_identity(
    faces: &[FaceEvent],
    descriptors: &DescriptorStore,
    threshold: f64,
) -> Result<(Vec<FaceEvent>, Vec<usize>), LabelError> {
    if !(threshold > 0.0) {
        return Err(LabelError::NonPositiveThreshold);
    }
    let descriptor = |i: usize| -> Result<Option<&[f32]>, LabelError> {
        match faces[i].descriptor {
            None => Ok(None),
            Some(idx) => descriptors.get(idx as usize).map(Some).ok_or(LabelError::MissingDescriptor(i)),
        }
    };
    let mut out = faces.to_vec();
    let mut added = Vec::new();
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by_key(|&i| faces[i].video);
    let limit = threshold * threshold;
    for group in order.chunk_by(|&a, &b| faces[a].video == faces[b].video) {
        let mut known: Vec<(&[f32], PersonId)> = Vec::new();
        for &i in group {
            if let (Some(label), Some(d)) = (faces[i].identity, descriptor(i)?) {
                known.push((d, label.person));
            }
        }
        if known.is_empty() {
            continue;
        }
        for &i in group {
            if faces[i].identity.is_some() {
                continue;
            }
            let Some(d) = descriptor(i)? else { continue };
            let (best, sq) = nearest(d, &known, 1)[0];
            if sq < limit {
                out[i].identity = Some(IdentityLabel { person: known[best].1, score: 0.0 });
                added.push(i);
            }
        }
    }
    added.sort_unstable();
    Ok((out, added))
}

/// Square grid: rows are human labels, columns model labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    cells: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(rows: &[&[u64]]) -> Result<Self, LabelError> {
        let classes = rows.len();
        if classes == 0 || rows.iter().any(|r| r.len() != classes) {
            return Err(LabelError::InvalidMatrix);
        }
        let cells: Vec<u64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        if cells.iter().all(|&c| c == 0) {
            return Err(LabelError::InvalidMatrix);
        }
        Ok(ConfusionMatrix { classes, cells })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, human: usize, model: usize) -> u64 {
        self.cells[human * self.classes + model]
    }

    fn column_sum(&self, model: usize) -> u64 {
        (0..self.classes).map(|r| self.get(r, model)).sum()
    }

    fn row_sum(&self, human: usize) -> u64 {
        (0..self.classes).map(|c| self.get(human, c)).sum()
    }
}

/// Per-class precision and recall; `None` where the denominator is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub precision: Vec<Option<f64>>,
    pub recall: Vec<Option<f64>>,
    /// `confusion_flow[c][r]`: among items the model labelled `c` but that are
    /// not `c`, the share whose true label is `r`. Binary stats always send
    /// everything to the other class.
    confusion_flow: Vec<Vec<f64>>,
}

impl LabelStats {
    /// Stats from precisions alone. Misattributed mass is spread evenly over
    /// the other classes.
    pub fn from_precisions(precision: &[f64]) -> Self {
        let n = precision.len();
        let share = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
        let confusion_flow = (0..n).map(|c| (0..n).map(|r| if r == c { 0.0 } else { share }).collect()).collect();
        LabelStats { precision: precision.iter().map(|&p| Some(p)).collect(), recall: vec![None; n], confusion_flow }
    }

    pub fn classes(&self) -> usize {
        self.precision.len()
    }
}

pub fn confusion_stats(m: &ConfusionMatrix) -> LabelStats {
    let n = m.classes();
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let precision = (0..n).map(|c| ratio(m.get(c, c), m.column_sum(c))).collect();
    let recall = (0..n).map(|c| ratio(m.get(c, c), m.row_sum(c))).collect();
    let confusion_flow = (0..n)
        .map(|c| {
            let off_diagonal = m.column_sum(c) - m.get(c, c);
            (0..n)
                .map(|r| match (r == c, off_diagonal) {
                    (true, _) => 0.0,
                    (false, 0) if n > 1 => 1.0 / (n - 1) as f64,
                    (false, 0) => 0.0,
                    (false, off) => m.get(r, c) as f64 / off as f64,
                })
                .collect()
        })
        .collect();
    LabelStats { precision, recall, confusion_flow }
}

/// Expected true-class counts given raw model counts.
///
/// For each class `c`, `raw_c × (1 − precision_c)` items are moved out of `c`
/// and into the classes they truly belong to. Flows are rounded to whole items
/// (largest remainder), so the total is conserved exactly.
pub fn adjust_counts(raw: &[u64], stats: &LabelStats) -> Result<Vec<u64>, LabelError> {
    let n = stats.classes();
    if raw.len() != n {
        return Err(LabelError::ClassMismatch { counts: raw.len(), classes: n });
    }
    let mut adjusted = raw.to_vec();
    for (c, &count) in raw.iter().enumerate() {
        let precision = match stats.precision[c] {
            Some(p) => p.clamp(0.0, 1.0),
            None if count == 0 => continue,
            None => return Err(LabelError::UndefinedPrecision(c)),
        };
        let moved = libm::round(count as f64 * (1.0 - precision)) as u64;
        if moved == 0 || n < 2 {
            continue;
        }
        let flows = apportion(moved, &stats.confusion_flow[c]);
        adjusted[c] -= moved;
        for (r, f) in flows.into_iter().enumerate() {
            adjusted[r] += f;
        }
    }
    Ok(adjusted)
}

/// Splits `total` into integer parts proportional to `weights`.
fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<u64> = exact.iter().map(|&x| libm::floor(x) as u64).collect();
    let mut left = total - parts.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| (exact[b] - libm::floor(exact[b])).total_cmp(&(exact[a] - libm::floor(exact[a]))).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        parts[i] += 1;
        left -= 1;
    }
    parts
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub p: f64,
    pub half_width: f64,
}

/// Normal-approximation confidence interval for a binomial proportion.
pub fn proportion_ci(successes: u64, n: u64, confidence: f64) -> Result<Proportion, LabelError> {
    if n == 0 || successes > n {
        return Err(LabelError::InvalidProportion);
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(LabelError::InvalidConfidence);
    }
    let p = successes as f64 / n as f64;
    let z = normal_quantile_two_sided(confidence);
    Ok(Proportion { p, half_width: z * libm::sqrt(p * (1.0 - p) / n as f64) })
}

/// z with P(|Z| < z) = `confidence` for a standard normal Z, solved with
/// Newton's method on `erf(z/√2) = confidence`.
pub fn normal_quantile_two_sided(confidence: f64) -> f64 {
    const SQRT_2: f64 = core::f64::consts::SQRT_2;
    let pdf_scale = 2.0 / libm::sqrt(2.0 * core::f64::consts::PI);
    let mut z = 2.0;
    for _ in 0..100 {
        let f = libm::erf(z / SQRT_2) - confidence;
        let df = pdf_scale * libm::exp(-z * z / 2.0);
        let step = f / df;
        z -= step;
        if z <= 0.0 {
            z = 1e-6;
        }
        if libm::fabs(step) < 1e-14 {
            break;
        }
    }
    z
}
