use rayon::prelude::*;

use super::FeatureSet;
use crate::dataset::{Dataset, FeatureId};
use crate::error::{Error, Result};
use crate::stats::{self, DiscretizedColumn};

/// CFS subset evaluator with all feature–class and feature–feature symmetric
/// uncertainties precomputed.
///
/// `merit(S) = k·mean(SU(f, class)) / sqrt(k + k(k-1)·mean(SU(f, g)))`
#[derive(Debug, Clone)]
pub struct CfsEvaluator {
    columns: Vec<DiscretizedColumn>,
    class_codes: Vec<u32>,
    class_su: Vec<f64>,
    pair_su: Vec<f64>,
}

impl CfsEvaluator {
    /// Discretizes `d` against its class column and precomputes correlations.
    pub fn new(d: &Dataset) -> Self {
        let columns = stats::discretize_dataset(d);
        let class_codes = stats::class_codes(d);
        Self::from_columns(columns, class_codes)
    }

    pub fn from_columns(columns: Vec<DiscretizedColumn>, class_codes: Vec<u32>) -> Self {
        let n = columns.len();
        let class_su: Vec<f64> = columns
            .par_iter()
            .map(|c| stats::symmetric_uncertainty(&c.bins, &class_codes))
            .collect();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| stats::symmetric_uncertainty(&columns[i].bins, &columns[j].bins))
            .collect();
        let mut pair_su = vec![0.0; n * n];
        for (&(i, j), v) in pairs.iter().zip(values) {
            pair_su[i * n + j] = v;
            pair_su[j * n + i] = v;
        }
        for i in 0..n {
            pair_su[i * n + i] = 1.0;
        }
        Self {
            columns,
            class_codes,
            class_su,
            pair_su,
        }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[DiscretizedColumn] {
        &self.columns
    }

    pub fn class_codes(&self) -> &[u32] {
        &self.class_codes
    }

    /// SU between feature column `i` and the class.
    pub fn class_su(&self, i: usize) -> f64 {
        self.class_su[i]
    }

    /// SU between feature columns `i` and `j`.
    pub fn pair_su(&self, i: usize, j: usize) -> f64 {
        self.pair_su[i * self.columns.len() + j]
    }

    /// Merit of a set of 0-based columns; 0 for the empty set.
    pub fn merit_of(&self, cols: &[usize]) -> f64 {
        let k = cols.len();
        if k == 0 {
            return 0.0;
        }
        let num: f64 = cols.iter().map(|&c| self.class_su[c]).sum();
        let mut pair = 0.0;
        for (a, &i) in cols.iter().enumerate() {
            for &j in &cols[a + 1..] {
                pair += self.pair_su(i, j);
            }
        }
        merit_from_sums(k, num, pair)
    }

    pub(crate) fn merit_of_mask(&self, mask: u64) -> f64 {
        let cols: Vec<usize> = (0..self.columns.len())
            .filter(|&b| mask & (1u64 << b) != 0)
            .collect();
        self.merit_of(&cols)
    }

    pub fn merit(&self, s: &FeatureSet) -> Result<f64> {
        if s.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        let cols = s.columns();
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.columns.len()) {
            return Err(Error::FeatureNotInSchema(FeatureId::from_column(bad)?));
        }
        Ok(self.merit_of(&cols))
    }

    /// Attaches the merit to `s`.
    pub fn scored(&self, s: FeatureSet) -> Result<FeatureSet> {
        let m = self.merit(&s)?;
        Ok(s.with_merit(m))
    }
}

pub(crate) fn merit_from_sums(k: usize, class_sum: f64, pair_sum: f64) -> f64 {
    let k = k as f64;
    let denom = (k + 2.0 * pair_sum).sqrt();
    if denom <= 0.0 {
        0.0
    } else {
        class_sum / denom
    }
}

/// CFS merit of `s` on `d`, computed from scratch (discretization included).
pub fn cfs_merit(s: &FeatureSet, d: &Dataset) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let class = stats::class_codes(d);
    let mut cols = Vec::with_capacity(s.len());
    for f in s.iter() {
        if !d.schema().contains(f) {
            return Err(Error::FeatureNotInSchema(f));
        }
        cols.push(stats::discretize_column(d, f, &class));
    }
    let k = cols.len();
    let num: f64 = cols
        .iter()
        .map(|c| stats::symmetric_uncertainty(&c.bins, &class))
        .sum();
    let mut pair = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            pair += stats::symmetric_uncertainty(&cols[i].bins, &cols[j].bins);
        }
    }
    Ok(merit_from_sums(k, num, pair))
}
