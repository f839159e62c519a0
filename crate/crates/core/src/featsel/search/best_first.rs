use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::scored_mask;
use crate::featsel::{CfsEvaluator, FeatureSet};

struct Node {
    merit: f64,
    mask: u64,
    /// Sorted member list; lexicographically smaller wins merit ties.
    members: Vec<u8>,
}

impl Node {
    fn new(cfs: &CfsEvaluator, mask: u64) -> Self {
        let members = (0..64u8).filter(|b| mask & (1u64 << b) != 0).collect();
        Self {
            merit: cfs.merit_of_mask(mask),
            mask,
            members,
        }
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.merit
            .total_cmp(&other.merit)
            .then_with(|| other.members.cmp(&self.members))
    }
}

/// Forward best-first search from the empty set. Stops after `stale_limit`
/// consecutive expansions that fail to improve the best subset seen.
pub fn best_first(cfs: &CfsEvaluator, stale_limit: usize) -> FeatureSet {
    let stale_limit = stale_limit.max(1);
    let n = cfs.n_features();
    let mut open = BinaryHeap::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut best: Option<(f64, Vec<u8>, u64)> = None;
    let mut stale = 0;

    // root: the empty set, expanded first
    let mut frontier = vec![0u64];
    loop {
        let parent = match frontier.pop() {
            Some(m) => m,
            None => match open.pop() {
                Some(Node { mask, .. }) => mask,
                None => break,
            },
        };
        let mut improved = false;
        for f in 0..n {
            let child = parent | (1u64 << f);
            if child == parent || !seen.insert(child) {
                continue;
            }
            let node = Node::new(cfs, child);
            let better = match &best {
                None => true,
                Some((m, members, _)) => {
                    node.merit > *m || (node.merit == *m && node.members < *members)
                }
            };
            if better {
                // equal-merit reorderings do not reset the stale counter
                if best.as_ref().map_or(true, |(m, _, _)| node.merit > *m) {
                    improved = true;
                }
                best = Some((node.merit, node.members.clone(), node.mask));
            }
            open.push(node);
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= stale_limit {
                break;
            }
        }
    }
    scored_mask(cfs, best.map_or(0, |b| b.2))
}
