//! Entropy-based attribute statistics.
//!
//! All measures take integer-coded columns (bin or class indices) and use
//! base-2 logarithms with `0 log 0 = 0`.

mod discretize;

pub use discretize::{
    class_codes, discretize_column, discretize_dataset, discretize_mdl, DiscretizedColumn,
};

/// `-Σ p log2 p` over non-negative counts or weights.
pub fn entropy_from_counts(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts {
        if c > 0.0 {
            let p = c / total;
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

fn cardinality(codes: &[u32]) -> usize {
    codes.iter().max().map_or(0, |&m| m as usize + 1)
}

fn histogram(codes: &[u32]) -> Vec<f64> {
    let mut h = vec![0.0; cardinality(codes)];
    for &c in codes {
        h[c as usize] += 1.0;
    }
    h
}

/// Entropy of a class multiset given as codes. Empty input has entropy 0.
pub fn entropy(labels: &[u32]) -> f64 {
    entropy_from_counts(&histogram(labels))
}

/// Dense joint count table of two aligned code columns.
#[derive(Debug, Clone)]
pub struct Contingency {
    rows: usize,
    cols: usize,
    counts: Vec<f64>,
}

impl Contingency {
    pub fn new(a: &[u32], b: &[u32]) -> Self {
        assert_eq!(a.len(), b.len(), "columns must be aligned");
        let rows = cardinality(a);
        let cols = cardinality(b);
        let mut counts = vec![0.0; rows * cols];
        for (&x, &y) in a.iter().zip(b) {
            counts[x as usize * cols + y as usize] += 1.0;
        }
        Self { rows, cols, counts }
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.counts[r * self.cols..(r + 1) * self.cols].iter().sum())
            .collect()
    }

    fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, acc) in s.iter_mut().enumerate() {
                *acc += self.counts[r * self.cols + c];
            }
        }
        s
    }

    pub fn row_entropy(&self) -> f64 {
        entropy_from_counts(&self.row_sums())
    }

    pub fn col_entropy(&self) -> f64 {
        entropy_from_counts(&self.col_sums())
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_from_counts(&self.counts)
    }

    /// `H(col) - Σ_r (n_r / n) H(col | row = r)`.
    pub fn info_gain(&self) -> f64 {
        let n = self.total();
        if n == 0.0 {
            return 0.0;
        }
        let mut conditional = 0.0;
        for r in 0..self.rows {
            let row = &self.counts[r * self.cols..(r + 1) * self.cols];
            let nr: f64 = row.iter().sum();
            if nr > 0.0 {
                conditional += nr / n * entropy_from_counts(row);
            }
        }
        (self.col_entropy() - conditional).max(0.0)
    }
}

/// Information gain of a binned column about the labels.
pub fn info_gain(bins: &[u32], labels: &[u32]) -> f64 {
    Contingency::new(bins, labels).info_gain()
}

/// Information gain divided by the split information (entropy of bin sizes);
/// 0 when the split information is 0.
pub fn gain_ratio(bins: &[u32], labels: &[u32]) -> f64 {
    let t = Contingency::new(bins, labels);
    let split = t.row_entropy();
    if split <= 0.0 {
        0.0
    } else {
        t.info_gain() / split
    }
}

/// `2 I(a; b) / (H(a) + H(b))`, in `[0, 1]`; 0 when both entropies vanish.
pub fn symmetric_uncertainty(a: &[u32], b: &[u32]) -> f64 {
    // Fixed argument order makes the result bit-for-bit symmetric.
    let t = if a <= b {
        Contingency::new(a, b)
    } else {
        Contingency::new(b, a)
    };
    su_from_table(&t)
}

pub(crate) fn su_from_table(t: &Contingency) -> f64 {
    let ha = t.row_entropy();
    let hb = t.col_entropy();
    let denom = ha + hb;
    if denom <= 0.0 {
        return 0.0;
    }
    // I(a;b) via H(b) - H(b|a) keeps a == b exact: SU = 1.
    let gain = t.info_gain();
    (2.0 * gain / denom).clamp(0.0, 1.0)
}
