use rand::Rng;

use super::{full_mask, scored_mask, SearchConfig};
use crate::featsel::{CfsEvaluator, FeatureSet};

pub(super) fn random_nonempty<R: Rng>(rng: &mut R, n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    let mask = rng.gen::<u64>() & full_mask(n);
    if mask == 0 {
        1u64 << rng.gen_range(0..n)
    } else {
        mask
    }
}

/// Tabu search over single bit flips from a random start.
///
/// Each iteration moves to the best non-tabu neighbour (lowest feature on
/// ties), even if worse. A flipped feature stays tabu for `tenure`
/// iterations unless the move beats the best subset found so far.
pub fn tabu_search(cfs: &CfsEvaluator, cfg: &SearchConfig) -> FeatureSet {
    let n = cfs.n_features();
    let mut rng = cfg.rng();
    let mut current = random_nonempty(&mut rng, n);
    let mut best = (cfs.merit_of_mask(current), current);
    let mut tabu_until = vec![0usize; n];

    for it in 1..=cfg.tabu.iterations {
        let mut chosen: Option<(usize, f64)> = None;
        for f in 0..n {
            let next = current ^ (1u64 << f);
            if next == 0 {
                continue;
            }
            let m = cfs.merit_of_mask(next);
            let allowed = tabu_until[f] < it || m > best.0;
            if allowed && chosen.map_or(true, |(_, c)| m > c) {
                chosen = Some((f, m));
            }
        }
        let Some((f, m)) = chosen else {
            break;
        };
        current ^= 1u64 << f;
        tabu_until[f] = it + cfg.tabu.tenure;
        if m > best.0 {
            best = (m, current);
        }
    }
    scored_mask(cfs, best.1)
}
