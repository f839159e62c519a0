use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ranked::{RankedColumn, RankedColumns};
use super::{argmax_class, Cell, TrainedModel, WeightedDataset, UNSEEN};
use crate::dataset::{AttackClass, FeatureId};
use crate::error::Result;
use crate::stats::entropy_from_counts;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// Minimum number of records in at least two branches of a split.
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            min_leaf: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        class: AttackClass,
    },
    /// `x <= threshold` goes left.
    Threshold {
        slot: usize,
        feature: FeatureId,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// One branch per training token reaching the node; other tokens follow
    /// the heaviest branch.
    Multiway {
        slot: usize,
        feature: FeatureId,
        branches: Vec<Option<u32>>,
        heaviest: u32,
    },
}

/// Flattened decision tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
}

impl TreeModel {
    pub(crate) fn predict_cells(&self, x: &[Cell]) -> AttackClass {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Threshold {
                    slot,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let v = match x[*slot] {
                        Cell::Num(v) => v,
                        Cell::Code(c) => c as f64,
                    };
                    at = if v <= *threshold { *left } else { *right } as usize;
                }
                Node::Multiway {
                    slot,
                    branches,
                    heaviest,
                    ..
                } => {
                    let next = match x[*slot] {
                        Cell::Code(c) if c != UNSEEN => {
                            branches.get(c as usize).copied().flatten()
                        }
                        _ => None,
                    };
                    at = next.unwrap_or(*heaviest) as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &TreeModel, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Threshold { left, right, .. } => {
                    1 + go(t, *left as usize).max(go(t, *right as usize))
                }
                Node::Multiway { branches, .. } => {
                    1 + branches
                        .iter()
                        .flatten()
                        .map(|&b| go(t, b as usize))
                        .max()
                        .unwrap_or(0)
                }
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// Training rows for one tree: base rows with weights and multiplicities.
pub(crate) struct Sample<'a> {
    pub rows: &'a [usize],
    pub weights: &'a [f64],
    pub mult: &'a [u32],
}

#[derive(Debug, Clone)]
enum SplitKind {
    Threshold { rank: u32, threshold: f64 },
    Multiway,
}

#[derive(Debug, Clone)]
struct Split {
    slot: usize,
    gain: f64,
    ratio: f64,
    kind: SplitKind,
}

/// One feature available for splitting.
#[derive(Clone, Copy)]
struct Candidate {
    slot: usize,
    column: usize,
    feature: FeatureId,
}

pub(crate) struct Grower<'a> {
    ranked: &'a RankedColumns,
    candidates: Vec<Candidate>,
    cfg: &'a TreeConfig,
    /// Features examined per node; `None` examines all.
    m_try: Option<usize>,
}

impl<'a> Grower<'a> {
    pub(crate) fn new(
        ranked: &'a RankedColumns,
        features: impl Iterator<Item = FeatureId>,
        cfg: &'a TreeConfig,
        m_try: Option<usize>,
    ) -> Self {
        let candidates = features
            .enumerate()
            .map(|(slot, feature)| Candidate {
                slot,
                column: feature.column(),
                feature,
            })
            .collect();
        Self {
            ranked,
            candidates,
            cfg,
            m_try,
        }
    }

    fn dist(&self, s: &Sample, items: &[u32]) -> ([f64; 5], u64) {
        let mut d = [0.0; 5];
        let mut n = 0u64;
        for &i in items {
            let i = i as usize;
            d[self.ranked.labels[s.rows[i]] as usize] += s.weights[i];
            n += s.mult[i] as u64;
        }
        (d, n)
    }

    pub(crate) fn grow(&self, s: &Sample, mut rng: Option<&mut ChaCha8Rng>) -> TreeModel {
        let mut nodes = vec![Node::Leaf {
            class: AttackClass::Normal,
        }];
        let mut stack: Vec<(usize, Vec<u32>, usize)> =
            vec![(0, (0..s.rows.len() as u32).collect(), 0)];
        let min_leaf = self.cfg.min_leaf.max(1) as u64;
        while let Some((at, items, depth)) = stack.pop() {
            let (dist, count) = self.dist(s, &items);
            let leaf = Node::Leaf {
                class: argmax_class(&dist),
            };
            let pure = dist.iter().filter(|&&w| w > 0.0).count() <= 1;
            let deep = self.cfg.max_depth.is_some_and(|m| depth >= m);
            if pure || deep || count < 2 * min_leaf {
                nodes[at] = leaf;
                continue;
            }
            let Some(split) = self.best_split(s, &items, &dist, min_leaf, rng.as_deref_mut())
            else {
                nodes[at] = leaf;
                continue;
            };
            let cand = self
                .candidates
                .iter()
                .find(|c| c.slot == split.slot)
                .copied()
                .expect("split slot");
            match (&split.kind, &self.ranked.columns[cand.column]) {
                (SplitKind::Threshold { rank, threshold }, RankedColumn::Numeric { ranks, .. }) => {
                    let (l, r): (Vec<u32>, Vec<u32>) = items
                        .iter()
                        .partition(|&&i| ranks[s.rows[i as usize]] <= *rank);
                    let (li, ri) = (nodes.len(), nodes.len() + 1);
                    nodes.push(Node::Leaf { class: AttackClass::Normal });
                    nodes.push(Node::Leaf { class: AttackClass::Normal });
                    nodes[at] = Node::Threshold {
                        slot: cand.slot,
                        feature: cand.feature,
                        threshold: *threshold,
                        left: li as u32,
                        right: ri as u32,
                    };
                    stack.push((ri, r, depth + 1));
                    stack.push((li, l, depth + 1));
                }
                (SplitKind::Multiway, RankedColumn::Symbolic { codes, n_tokens }) => {
                    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); *n_tokens];
                    let mut weight = vec![0.0; *n_tokens];
                    for &i in &items {
                        let c = codes[s.rows[i as usize]] as usize;
                        groups[c].push(i);
                        weight[c] += s.weights[i as usize];
                    }
                    let mut branches = vec![None; *n_tokens];
                    let mut heaviest: Option<(usize, f64)> = None;
                    for (c, g) in groups.into_iter().enumerate() {
                        if g.is_empty() {
                            continue;
                        }
                        let idx = nodes.len();
                        nodes.push(Node::Leaf { class: AttackClass::Normal });
                        branches[c] = Some(idx as u32);
                        if heaviest.map_or(true, |(_, w)| weight[c] > w) {
                            heaviest = Some((idx, weight[c]));
                        }
                        stack.push((idx, g, depth + 1));
                    }
                    nodes[at] = Node::Multiway {
                        slot: cand.slot,
                        feature: cand.feature,
                        branches,
                        heaviest: heaviest.expect("non-empty node").0 as u32,
                    };
                }
                _ => unreachable!("split kind matches column kind"),
            }
        }
        TreeModel { nodes }
    }

    /// Picks each feature's best information-gain split, then among features
    /// whose gain is at least the average gain, the one with the highest gain
    /// ratio (lowest slot on ties).
    fn best_split(
        &self,
        s: &Sample,
        items: &[u32],
        dist: &[f64; 5],
        min_leaf: u64,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Option<Split> {
        let mut order: Vec<usize> = (0..self.candidates.len()).collect();
        let limit = match (self.m_try, rng) {
            (Some(m), Some(rng)) if m < order.len() => {
                order.shuffle(rng);
                m.max(1)
            }
            _ => order.len(),
        };
        let total: f64 = dist.iter().sum();
        let h = entropy_from_counts(dist);
        let mut found: Vec<Split> = Vec::new();
        for (n, &ci) in order.iter().enumerate() {
            // keep drawing features past the budget until one is informative
            if n >= limit && found.iter().any(|s| s.gain > EPS) {
                break;
            }
            let cand = self.candidates[ci];
            let split = match &self.ranked.columns[cand.column] {
                RankedColumn::Numeric { ranks, values } => {
                    numeric_split(s, items, ranks, values, &self.ranked.labels, total, h, min_leaf)
                }
                RankedColumn::Symbolic { codes, n_tokens } => symbolic_split(
                    s,
                    items,
                    codes,
                    *n_tokens,
                    &self.ranked.labels,
                    total,
                    h,
                    min_leaf,
                ),
            };
            if let Some((gain, ratio, kind)) = split {
                found.push(Split {
                    slot: cand.slot,
                    gain,
                    ratio,
                    kind,
                });
            }
        }
        found.sort_by_key(|s| s.slot);
        if !found.iter().any(|s| s.gain > EPS) {
            // only uninformative splits (e.g. XOR): take the lowest slot so
            // deeper levels can still separate the classes
            return found.into_iter().next();
        }
        found.retain(|s| s.gain > EPS);
        let avg = found.iter().map(|s| s.gain).sum::<f64>() / found.len() as f64;
        let mut best: Option<Split> = None;
        for sp in found {
            if sp.gain + EPS < avg {
                continue;
            }
            if best.as_ref().map_or(true, |b| sp.ratio > b.ratio + EPS) {
                best = Some(sp);
            }
        }
        best
    }
}

#[allow(clippy::too_many_arguments)]
fn numeric_split(
    s: &Sample,
    items: &[u32],
    ranks: &[u32],
    values: &[f64],
    labels: &[u8],
    total: f64,
    h: f64,
    min_leaf: u64,
) -> Option<(f64, f64, SplitKind)> {
    let mut sorted: Vec<(u32, u32)> = items
        .iter()
        .map(|&i| (ranks[s.rows[i as usize]], i))
        .collect();
    sorted.sort_unstable();
    let n_total: u64 = items.iter().map(|&i| s.mult[i as usize] as u64).sum();
    let mut all = [0.0; 5];
    for &(_, i) in &sorted {
        all[labels[s.rows[i as usize]] as usize] += s.weights[i as usize];
    }
    let mut left = [0.0; 5];
    let mut nl = 0u64;
    let mut best: Option<(f64, f64, u32, u32)> = None;
    for k in 0..sorted.len() - 1 {
        let (rank, i) = sorted[k];
        let i = i as usize;
        left[labels[s.rows[i]] as usize] += s.weights[i];
        nl += s.mult[i] as u64;
        let next = sorted[k + 1].0;
        if next == rank || nl < min_leaf || n_total - nl < min_leaf {
            continue;
        }
        let wl: f64 = left.iter().sum();
        let mut right = [0.0; 5];
        for c in 0..5 {
            right[c] = (all[c] - left[c]).max(0.0);
        }
        let wr = (total - wl).max(0.0);
        let gain = h - (wl / total) * entropy_from_counts(&left) - (wr / total) * entropy_from_counts(&right);
        if best.map_or(true, |b| gain > b.0 + EPS) {
            let split_info = entropy_from_counts(&[wl, wr]);
            best = Some((gain, split_info, rank, next));
        }
    }
    let (gain, split_info, ra, rb) = best?;
    let gain = gain.max(0.0);
    if split_info <= 0.0 {
        return None;
    }
    let (a, b) = (values[ra as usize], values[rb as usize]);
    let mid = a + (b - a) / 2.0;
    let threshold = if mid < b { mid } else { a };
    Some((gain, gain / split_info, SplitKind::Threshold { rank: ra, threshold }))
}

#[allow(clippy::too_many_arguments)]
fn symbolic_split(
    s: &Sample,
    items: &[u32],
    codes: &[u32],
    n_tokens: usize,
    labels: &[u8],
    total: f64,
    h: f64,
    min_leaf: u64,
) -> Option<(f64, f64, SplitKind)> {
    let mut dist = vec![[0.0f64; 5]; n_tokens];
    let mut count = vec![0u64; n_tokens];
    for &i in items {
        let i = i as usize;
        let c = codes[s.rows[i]] as usize;
        dist[c][labels[s.rows[i]] as usize] += s.weights[i];
        count[c] += s.mult[i] as u64;
    }
    if count.iter().filter(|&&n| n >= min_leaf).count() < 2 {
        return None;
    }
    let mut cond = 0.0;
    let mut sizes = Vec::new();
    for d in dist.iter() {
        let w: f64 = d.iter().sum();
        if w > 0.0 {
            cond += (w / total) * entropy_from_counts(d);
            sizes.push(w);
        }
    }
    let gain = (h - cond).max(0.0);
    let split_info = entropy_from_counts(&sizes);
    if split_info <= 0.0 {
        return None;
    }
    Some((gain, gain / split_info, SplitKind::Multiway))
}

pub(super) fn fit(w: &WeightedDataset, cfg: &TreeConfig) -> TreeModel {
    let ranked = w.base().ranked();
    let mult = vec![1u32; w.len()];
    let sample = Sample {
        rows: w.rows(),
        weights: w.weights(),
        mult: &mult,
    };
    Grower::new(&ranked, w.features().iter(), cfg, None).grow(&sample, None)
}

/// Trains a single unpruned C4.5-style tree.
pub fn train_tree(w: &WeightedDataset, cfg: &TreeConfig) -> Result<TrainedModel> {
    super::train(&super::ModelSpec::Tree(cfg.clone()), w, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::fixtures::numeric;
    use crate::featsel::FeatureSet;
    use AttackClass::{Dos, Normal};

    #[test]
    fn xor_needs_depth_two() {
        let d = numeric(&[
            (&[0.0, 0.0], Normal),
            (&[0.0, 1.0], Dos),
            (&[1.0, 0.0], Dos),
            (&[1.0, 1.0], Normal),
        ]);
        let w = WeightedDataset::uniform(&d, FeatureSet::all(2)).unwrap();
        let cfg = TreeConfig { min_leaf: 1, max_depth: None };
        // XOR has zero gain at the root for either feature alone
        assert_eq!(fit(&w, &cfg).depth(), 2);
        let t = train_tree(&w, &cfg).unwrap();
        assert_eq!(t.predict_dataset(&d).unwrap(), d.classes());
    }

    #[test]
    fn pure_node_is_single_leaf() {
        let d = numeric(&[(&[1.0], Dos), (&[2.0], Dos), (&[3.0], Dos)]);
        let w = WeightedDataset::uniform(&d, FeatureSet::all(1)).unwrap();
        let m = fit(&w, &TreeConfig::default());
        assert_eq!(m.nodes, vec![Node::Leaf { class: Dos }]);
    }

    #[test]
    fn threshold_splits_between_values() {
        let d = numeric(&[(&[1.0], Normal), (&[2.0], Normal), (&[8.0], Dos), (&[9.0], Dos)]);
        let w = WeightedDataset::uniform(&d, FeatureSet::all(1)).unwrap();
        let m = fit(&w, &TreeConfig::default());
        match &m.nodes[0] {
            Node::Threshold { threshold, .. } => assert_eq!(*threshold, 5.0),
            n => panic!("unexpected root {n:?}"),
        }
        assert_eq!(m.n_leaves(), 2);
    }
}
