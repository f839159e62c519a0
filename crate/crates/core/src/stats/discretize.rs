//! Supervised discretization with the Fayyad–Irani MDL stopping rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy_from_counts;
use crate::dataset::{Column, Dataset, FeatureId};

/// A feature mapped to bins. Continuous features carry ascending cut points;
/// symbolic features pass through with one bin per token and no cut points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedColumn {
    pub feature: FeatureId,
    pub cut_points: Vec<f64>,
    pub bins: Vec<u32>,
    pub n_bins: usize,
}

impl DiscretizedColumn {
    /// Bin of a new value: the number of cut points strictly below it.
    pub fn bin_of(&self, x: f64) -> u32 {
        self.cut_points.partition_point(|&c| c < x) as u32
    }
}

/// One run of equal values in sorted order with its class counts.
struct Run {
    value: f64,
    counts: Vec<f64>,
}

fn single_class(counts: &[f64]) -> Option<usize> {
    let mut found = None;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0.0 {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

fn classes_present(counts: &[f64]) -> f64 {
    counts.iter().filter(|&&c| c > 0.0).count() as f64
}

/// Recursively splits `runs` and appends accepted cut points (unsorted).
fn split(runs: &[Run], n_classes: usize, cuts: &mut Vec<f64>) {
    if runs.len() < 2 {
        return;
    }
    let mut total = vec![0.0; n_classes];
    for r in runs {
        for (t, c) in total.iter_mut().zip(&r.counts) {
            *t += c;
        }
    }
    let n: f64 = total.iter().sum();
    let h_all = entropy_from_counts(&total);
    if h_all == 0.0 {
        return;
    }

    let mut left = vec![0.0; n_classes];
    let mut right = vec![0.0; n_classes];
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for i in 1..runs.len() {
        for (l, c) in left.iter_mut().zip(&runs[i - 1].counts) {
            *l += c;
        }
        // Only boundary points: adjacent runs that are not both pure in the same class.
        let a = single_class(&runs[i - 1].counts);
        if a.is_some() && a == single_class(&runs[i].counts) {
            continue;
        }
        for ((r, t), l) in right.iter_mut().zip(&total).zip(&left) {
            *r = t - l;
        }
        let nl: f64 = left.iter().sum();
        let nr = n - nl;
        let hl = entropy_from_counts(&left);
        let hr = entropy_from_counts(&right);
        let gain = h_all - (nl / n) * hl - (nr / n) * hr;
        // strict comparison: the lowest candidate wins ties
        if best.map_or(true, |(_, g, _, _)| gain > g) {
            best = Some((i, gain, hl, hr));
        }
    }
    let Some((at, gain, hl, hr)) = best else {
        return;
    };

    let mut left = vec![0.0; n_classes];
    for r in &runs[..at] {
        for (l, c) in left.iter_mut().zip(&r.counts) {
            *l += c;
        }
    }
    let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
    let k = classes_present(&total);
    let k1 = classes_present(&left);
    let k2 = classes_present(&right);
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h_all - k1 * hl - k2 * hr);
    let threshold = ((n - 1.0).log2() + delta) / n;
    if gain <= threshold {
        return;
    }
    cuts.push((runs[at - 1].value + runs[at].value) / 2.0);
    split(&runs[..at], n_classes, cuts);
    split(&runs[at..], n_classes, cuts);
}

/// Discretizes a continuous column against class codes `labels`.
///
/// Candidate cuts are midpoints between adjacent distinct values; the best
/// information-gain cut is accepted while it passes the MDL criterion, then
/// both halves are split recursively.
pub fn discretize_mdl(feature: FeatureId, values: &[f64], labels: &[u32]) -> DiscretizedColumn {
    assert_eq!(values.len(), labels.len(), "values and labels must be aligned");
    let n_classes = labels.iter().max().map_or(0, |&m| m as usize + 1);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut runs: Vec<Run> = Vec::new();
    for &i in &order {
        let v = values[i];
        match runs.last_mut() {
            Some(run) if run.value == v => run.counts[labels[i] as usize] += 1.0,
            _ => {
                let mut counts = vec![0.0; n_classes];
                counts[labels[i] as usize] += 1.0;
                runs.push(Run { value: v, counts });
            }
        }
    }

    let mut cut_points = Vec::new();
    split(&runs, n_classes, &mut cut_points);
    cut_points.sort_by(f64::total_cmp);

    let mut column = DiscretizedColumn {
        feature,
        n_bins: cut_points.len() + 1,
        cut_points,
        bins: Vec::new(),
    };
    column.bins = values.iter().map(|&x| column.bin_of(x)).collect();
    column
}

/// Discretizes one feature of `d`; symbolic features keep their token codes.
pub fn discretize_column(d: &Dataset, feature: FeatureId, labels: &[u32]) -> DiscretizedColumn {
    match d.column(feature) {
        Column::Numeric(values) => discretize_mdl(feature, values, labels),
        Column::Symbolic { codes, vocab } => DiscretizedColumn {
            feature,
            cut_points: Vec::new(),
            bins: codes.clone(),
            n_bins: vocab.len().max(1),
        },
    }
}

/// Discretizes every feature of `d` against its class column, in schema order.
pub fn discretize_dataset(d: &Dataset) -> Vec<DiscretizedColumn> {
    let labels = class_codes(d);
    let ids: Vec<FeatureId> = d.schema().ids().collect();
    ids.par_iter()
        .map(|&f| discretize_column(d, f, &labels))
        .collect()
}

/// Class column as codes (class enumeration index).
pub fn class_codes(d: &Dataset) -> Vec<u32> {
    d.classes().iter().map(|c| c.index() as u32).collect()
}
