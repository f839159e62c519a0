use serde::{Deserialize, Serialize};

use super::{CfsEvaluator, FeatureSet, RankedList};
use crate::dataset::{Dataset, FeatureId};
use crate::stats;

/// Single-attribute scores used to order features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleEvaluator {
    InfoGain,
    GainRatio,
    SymmetricUncertainty,
}

impl SingleEvaluator {
    pub fn score(self, bins: &[u32], labels: &[u32]) -> f64 {
        match self {
            SingleEvaluator::InfoGain => stats::info_gain(bins, labels),
            SingleEvaluator::GainRatio => stats::gain_ratio(bins, labels),
            SingleEvaluator::SymmetricUncertainty => stats::symmetric_uncertainty(bins, labels),
        }
    }
}

/// Ranks every feature of `d` against the class column.
pub fn rank_features(d: &Dataset, evaluator: SingleEvaluator) -> RankedList {
    rank_with(&CfsEvaluator::new(d), evaluator)
}

/// Ranks using the discretized columns already held by `cfs`.
pub fn rank_with(cfs: &CfsEvaluator, evaluator: SingleEvaluator) -> RankedList {
    let labels = cfs.class_codes();
    RankedList::new(
        cfs.columns()
            .iter()
            .map(|c| (c.feature, evaluator.score(&c.bins, labels)))
            .collect(),
    )
}

/// Ranks features, then returns the nested prefix with the highest CFS merit
/// (smallest prefix on ties).
pub fn rank_search(cfs: &CfsEvaluator, evaluator: SingleEvaluator) -> FeatureSet {
    let ranking = rank_with(cfs, evaluator);
    let order: Vec<usize> = ranking.features().map(FeatureId::column).collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for k in 1..=order.len() {
        let m = cfs.merit_of(&order[..k]);
        if m > best.0 {
            best = (m, k);
        }
    }
    let set = FeatureSet::from_columns(order[..best.1].iter().copied());
    let merit = cfs.merit_of(&set.columns());
    set.with_merit(merit)
}
