//! Brute-force reference computations for the idsfeat test suites.
//!
//! Everything here is deliberately naive and shares no code with
//! `idsfeat-core`: probabilities come from explicit joint-distribution maps,
//! subsets from full enumeration, and metrics straight from their closed-form
//! ratios. Inputs are plain integer codes so the oracle never sees the
//! library's data types.

use std::collections::BTreeMap;

fn log2(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_2
}

/// Shannon entropy (bits) of an empirical distribution over arbitrary keys.
fn entropy_of_map<K: Ord>(counts: &BTreeMap<K, usize>) -> f64 {
    let n: usize = counts.values().sum();
    if n == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts.values() {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * log2(p);
        }
    }
    h
}

fn tally<K: Ord + Clone>(xs: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

/// H(X) from a list of symbols.
pub fn entropy(xs: &[u32]) -> f64 {
    entropy_of_map(&tally(xs.iter().copied()))
}

/// H(counts) from a list of category counts.
pub fn entropy_of_counts(counts: &[usize]) -> f64 {
    let m: BTreeMap<usize, usize> = counts.iter().copied().enumerate().collect();
    entropy_of_map(&m)
}

/// H(X, Y) from the joint distribution.
pub fn joint_entropy(xs: &[u32], ys: &[u32]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    entropy_of_map(&tally(xs.iter().copied().zip(ys.iter().copied())))
}

/// I(X; Y) = Σ p(x,y) log p(x,y) / (p(x) p(y)), evaluated term by term.
pub fn mutual_information(xs: &[u32], ys: &[u32]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return 0.0;
    }
    let px = tally(xs.iter().copied());
    let py = tally(ys.iter().copied());
    let pxy = tally(xs.iter().copied().zip(ys.iter().copied()));
    let mut mi = 0.0;
    for (&(x, y), &c) in &pxy {
        let pj = c as f64 / n;
        let pa = px[&x] as f64 / n;
        let pb = py[&y] as f64 / n;
        mi += pj * log2(pj / (pa * pb));
    }
    mi.max(0.0)
}

/// Information gain by explicit partition: split the label list by bin and
/// subtract the weighted entropy of each part.
pub fn info_gain_by_partition(bins: &[u32], labels: &[u32]) -> f64 {
    assert_eq!(bins.len(), labels.len());
    let n = labels.len();
    if n == 0 {
        return 0.0;
    }
    let mut parts: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&b, &l) in bins.iter().zip(labels) {
        parts.entry(b).or_default().push(l);
    }
    let mut conditional = 0.0;
    for part in parts.values() {
        conditional += part.len() as f64 / n as f64 * entropy(part);
    }
    entropy(labels) - conditional
}

pub fn gain_ratio(bins: &[u32], labels: &[u32]) -> f64 {
    let split = entropy(bins);
    if split == 0.0 {
        0.0
    } else {
        info_gain_by_partition(bins, labels) / split
    }
}

pub fn symmetric_uncertainty(a: &[u32], b: &[u32]) -> f64 {
    let denom = entropy(a) + entropy(b);
    if denom == 0.0 {
        0.0
    } else {
        2.0 * mutual_information(a, b) / denom
    }
}

/// CFS merit of `subset` (column indices) computed from raw columns.
pub fn cfs_merit(columns: &[Vec<u32>], class: &[u32], subset: &[usize]) -> f64 {
    let k = subset.len();
    assert!(k > 0, "empty subset");
    let rcf: f64 = subset
        .iter()
        .map(|&f| symmetric_uncertainty(&columns[f], class))
        .sum::<f64>()
        / k as f64;
    let mut pair_sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            pair_sum += symmetric_uncertainty(&columns[subset[i]], &columns[subset[j]]);
            pairs += 1;
        }
    }
    let rff = if pairs == 0 { 0.0 } else { pair_sum / pairs as f64 };
    let kf = k as f64;
    kf * rcf / (kf + kf * (kf - 1.0) * rff).sqrt()
}

/// All non-empty subsets of `0..n` as sorted index lists.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    assert!(n <= 20, "enumeration is exponential");
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Best CFS merit over every non-empty subset, with the first subset (in mask
/// order) attaining it.
pub fn exhaustive_cfs_optimum(columns: &[Vec<u32>], class: &[u32]) -> (f64, Vec<usize>) {
    // Pre-compute SU once per pair; still an independent evaluation path.
    let n = columns.len();
    let cf: Vec<f64> = columns.iter().map(|c| symmetric_uncertainty(c, class)).collect();
    let mut ff = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = symmetric_uncertainty(&columns[i], &columns[j]);
            ff[i][j] = s;
            ff[j][i] = s;
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for subset in all_subsets(n) {
        let k = subset.len() as f64;
        let num: f64 = subset.iter().map(|&f| cf[f]).sum();
        let mut pair = 0.0;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                pair += ff[i][j];
            }
        }
        let merit = num / (k + 2.0 * pair).sqrt();
        if merit > best.0 {
            best = (merit, subset);
        }
    }
    best
}

/// Binary one-vs-rest metrics straight from their definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryMetrics {
    pub tpr: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub npv: f64,
    pub ppv: f64,
    pub f_measure: f64,
    pub mcc: f64,
    pub accuracy: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn binary_metrics(tp: u64, tn: u64, fp: u64, fn_: u64) -> BinaryMetrics {
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let mcc_den = ((tp + fn_) * (tp + fp) * (tn + fn_) * (tn + fp)).sqrt();
    BinaryMetrics {
        tpr: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        fpr: ratio(fp, fp + tn),
        npv: ratio(tn, tn + fn_),
        ppv: ratio(tp, tp + fp),
        f_measure: ratio(2.0 * tp, 2.0 * tp + fp + fn_),
        mcc: ratio(tp * tn - fp * fn_, mcc_den),
        accuracy: ratio(tp + tn, tp + tn + fp + fn_),
    }
}

/// Confusion counts by a pairwise scan: for every (actual, predicted) pair of
/// class codes, count matching positions one at a time.
pub fn naive_confusion(actual: &[u32], predicted: &[u32], n_classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (a, row) in m.iter_mut().enumerate() {
        for (p, cell) in row.iter_mut().enumerate() {
            *cell = actual
                .iter()
                .zip(predicted)
                .filter(|(&x, &y)| x as usize == a && y as usize == p)
                .count() as u64;
        }
    }
    m
}

/// Information gain of every binary threshold split `value <= t` over the
/// midpoints of adjacent distinct values. Returns (threshold, gain) pairs in
/// ascending threshold order.
pub fn all_threshold_gains(values: &[f64], labels: &[u32]) -> Vec<(f64, f64)> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    distinct
        .windows(2)
        .map(|w| {
            let t = (w[0] + w[1]) / 2.0;
            let bins: Vec<u32> = values.iter().map(|&v| u32::from(v > t)).collect();
            (t, info_gain_by_partition(&bins, labels))
        })
        .collect()
}

/// Weighted entropy of class weights.
pub fn weighted_entropy(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * log2(p)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_of_three_to_one() {
        assert!((entropy(&[0, 0, 0, 1]) - 0.8112781244591328).abs() < 1e-15);
    }

    #[test]
    fn mi_identity() {
        let a = [0, 1, 1, 2, 0, 2, 2, 1];
        let b = [1, 1, 0, 0, 1, 1, 0, 0];
        let lhs = mutual_information(&a, &b);
        let rhs = entropy(&a) + entropy(&b) - joint_entropy(&a, &b);
        assert!((lhs - rhs).abs() < 1e-12);
        assert!((info_gain_by_partition(&a, &b) - lhs).abs() < 1e-12);
    }

    #[test]
    fn mcc_worked_example() {
        let m = binary_metrics(50, 40, 5, 5);
        assert!((m.mcc - 1975.0 / 2475.0).abs() < 1e-15);
        assert!((m.f_measure - 100.0 / 110.0).abs() < 1e-15);
    }
}
