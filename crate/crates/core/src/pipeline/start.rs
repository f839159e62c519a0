use serde::{Deserialize, Serialize};

use crate::dataset::{AttackClass, FeatureId};
use crate::featsel::{AggregateReport, FeatureSet, GridDataset, RankedList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StartSetConfig {
    /// Consensus rows a feature must appear in.
    pub min_class_rows: usize,
    /// Methods whose union must contain the feature.
    pub min_algo_votes: usize,
}

impl Default for StartSetConfig {
    fn default() -> Self {
        Self {
            min_class_rows: 4,
            min_algo_votes: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSet {
    pub features: FeatureSet,
    /// Thresholds finally used.
    pub min_class_rows: usize,
    pub min_algo_votes: usize,
    /// Threshold pairs tried and found empty, in order.
    pub relaxations: Vec<(usize, usize)>,
}

/// Features common to many consensus rows and picked by many methods.
/// When nothing qualifies the thresholds drop by one alternately, class rows
/// first, down to 1/1.
pub fn build_start_set(report: &AggregateReport, cfg: &StartSetConfig) -> StartSet {
    let (mut rows, mut votes) = (cfg.min_class_rows.max(1), cfg.min_algo_votes.max(1));
    let all = report.features();
    let mut relaxations = Vec::new();
    let mut relax_rows = true;
    loop {
        let features: FeatureSet = all
            .iter()
            .filter(|&f| report.class_rows(f) >= rows && report.algorithm_votes(f) >= votes)
            .collect();
        if !features.is_empty() || (rows == 1 && votes == 1) {
            return StartSet {
                features,
                min_class_rows: rows,
                min_algo_votes: votes,
                relaxations,
            };
        }
        relaxations.push((rows, votes));
        if (relax_rows && rows > 1) || votes == 1 {
            rows -= 1;
        } else {
            votes -= 1;
        }
        relax_rows = !relax_rows;
    }
}

/// Per attack class, its consensus features ranked by vote count.
pub fn class_rankings(report: &AggregateReport, classes: &[AttackClass]) -> Vec<(AttackClass, RankedList)> {
    classes
        .iter()
        .map(|&c| {
            let entries = GridDataset::of_class(c)
                .and_then(|g| report.class(g))
                .map(|row| {
                    row.consensus
                        .iter()
                        .map(|f| (f, row.votes_for(f) as f64))
                        .collect()
                })
                .unwrap_or_default();
            (c, RankedList::new(entries))
        })
        .collect()
}

/// Rankings of `features` by total method votes over all rows and by the
/// number of consensus rows containing them.
pub fn vote_rankings(report: &AggregateReport, features: &FeatureSet) -> (RankedList, RankedList) {
    let total_votes = |f: FeatureId| -> usize {
        report.classes.iter().map(|c| c.votes_for(f)).sum()
    };
    let algo = RankedList::new(features.iter().map(|f| (f, total_votes(f) as f64)).collect());
    let class = RankedList::new(
        features
            .iter()
            .map(|f| (f, report.class_rows(f) as f64))
            .collect(),
    );
    (algo, class)
}
