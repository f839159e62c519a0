//! Feature-subset evaluation and search.
//!
//! Subsets are scored with the CFS merit over symmetric uncertainty of
//! MDL-discretized features. Seven search strategies explore the subset space;
//! [`grid`] runs them over the per-class datasets and aggregates votes.

mod cfs;
pub mod grid;
mod rank;
mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cfs::{cfs_merit, CfsEvaluator};
pub use grid::{
    aggregate_consensus, run_all_methods, AggregateReport, ClassConsensus, Grid, GridCell,
    GridDataset, MethodUnion,
};
pub use rank::{rank_features, rank_search, rank_with, SingleEvaluator};
pub use search::{
    best_first, bpso_search, genetic_search, greedy_stepwise, greedy_stepwise_trace, tabu_search,
    BestFirstParams, GeneticParams, PsoParams, SearchConfig, SearchMethod, TabuParams,
};

use crate::dataset::FeatureId;
use crate::error::{Error, Result};

/// A set of features, optionally carrying its CFS merit on some dataset.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeatureSet {
    features: BTreeSet<FeatureId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    merit: Option<f64>,
}

impl PartialEq for FeatureSet {
    /// Membership only; the cached merit is not part of identity.
    fn eq(&self, other: &Self) -> bool {
        self.features == other.features
    }
}

impl Eq for FeatureSet {}

impl std::hash::Hash for FeatureSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.features.hash(state);
    }
}

impl FeatureSet {
    pub fn new(features: impl IntoIterator<Item = FeatureId>) -> Self {
        Self {
            features: features.into_iter().collect(),
            merit: None,
        }
    }

    /// Features `1..=n`.
    pub fn all(n: usize) -> Self {
        Self::from_indices(1..=n).expect("n must be within 1..=41")
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let features = indices
            .into_iter()
            .map(FeatureId::new)
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Self {
            features,
            merit: None,
        })
    }

    /// From 0-based column positions.
    pub fn from_columns(columns: impl IntoIterator<Item = usize>) -> Self {
        Self::new(
            columns
                .into_iter()
                .map(|c| FeatureId::from_column(c).expect("column within 0..41")),
        )
    }

    pub(crate) fn from_mask(mask: u64) -> Self {
        Self::from_columns((0..64).filter(|b| mask & (1u64 << b) != 0))
    }

    pub(crate) fn mask(&self) -> u64 {
        self.features
            .iter()
            .fold(0u64, |m, f| m | (1u64 << f.column()))
    }

    pub fn with_merit(mut self, merit: f64) -> Self {
        self.merit = Some(merit);
        self
    }

    pub fn merit(&self) -> Option<f64> {
        self.merit
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, f: FeatureId) -> bool {
        self.features.contains(&f)
    }

    pub fn iter(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.features.iter().copied()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.index()).collect()
    }

    pub fn columns(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.column()).collect()
    }

    pub fn inserted(&self, f: FeatureId) -> Self {
        let mut s = Self::new(self.iter());
        s.features.insert(f);
        s
    }

    pub fn removed(&self, f: FeatureId) -> Self {
        let mut s = Self::new(self.iter());
        s.features.remove(&f);
        s
    }

    pub fn union(&self, other: &FeatureSet) -> Self {
        Self::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &FeatureSet) -> Self {
        Self::new(self.iter().filter(|f| other.contains(*f)))
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.features.is_subset(&other.features)
    }

    /// |A ∩ B| / |A ∪ B|; 1 for two empty sets.
    pub fn jaccard(&self, other: &FeatureSet) -> f64 {
        let union = self.union(other).len();
        if union == 0 {
            1.0
        } else {
            self.intersection(other).len() as f64 / union as f64
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.features.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    /// Parses `1,3,4` (whitespace tolerant).
    fn from_str(s: &str) -> Result<Self> {
        let indices = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad feature index `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(indices)
    }
}

impl FromIterator<FeatureId> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = FeatureId>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// Features sorted by descending score; ties by ascending index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    entries: Vec<(FeatureId, f64)>,
}

impl RankedList {
    pub fn new(mut entries: Vec<(FeatureId, f64)>) -> Self {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        entries.dedup_by_key(|e| e.0);
        Self { entries }
    }

    pub fn entries(&self) -> &[(FeatureId, f64)] {
        &self.entries
    }

    pub fn features(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 0-based position of `f`, if ranked.
    pub fn position(&self, f: FeatureId) -> Option<usize> {
        self.entries.iter().position(|e| e.0 == f)
    }

    /// The last `q` features (lowest scores).
    pub fn tail(&self, q: usize) -> FeatureSet {
        let start = self.entries.len().saturating_sub(q);
        FeatureSet::new(self.entries[start..].iter().map(|e| e.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_set_parse_and_display() {
        let s: FeatureSet = "5, 1,3".parse().unwrap();
        assert_eq!(s.to_string(), "1,3,5");
        assert!("0,2".parse::<FeatureSet>().is_err());
        assert!("x".parse::<FeatureSet>().is_err());
        assert_eq!(FeatureSet::from_mask(s.mask()), s);
    }

    #[test]
    fn jaccard() {
        let a: FeatureSet = "1,2,3".parse().unwrap();
        let b: FeatureSet = "2,3,4".parse().unwrap();
        assert!((a.jaccard(&b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ranked_list_order_and_tail() {
        let f = |i| FeatureId::new(i).unwrap();
        let r = RankedList::new(vec![(f(3), 0.5), (f(1), 0.5), (f(2), 0.9), (f(4), 0.0)]);
        let order: Vec<usize> = r.features().map(|x| x.index()).collect();
        assert_eq!(order, vec![2, 1, 3, 4]);
        assert_eq!(r.tail(2).indices(), vec![3, 4]);
        assert_eq!(r.position(f(1)), Some(1));
    }
}
