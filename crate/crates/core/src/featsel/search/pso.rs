use rand::Rng;

use super::tabu::random_nonempty;
use super::{scored_mask, SearchConfig};
use crate::featsel::{CfsEvaluator, FeatureSet};

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Binary particle swarm search with a sigmoid transfer function and
/// inertia decreasing linearly across iterations.
pub fn bpso_search(cfs: &CfsEvaluator, cfg: &SearchConfig) -> FeatureSet {
    let p = &cfg.pso;
    let n = cfs.n_features();
    let mut rng = cfg.rng();
    let swarm = p.swarm.max(1);

    let mut pos: Vec<u64> = (0..swarm).map(|_| random_nonempty(&mut rng, n)).collect();
    let mut vel: Vec<Vec<f64>> = (0..swarm)
        .map(|_| (0..n).map(|_| rng.gen_range(-p.v_max..=p.v_max)).collect())
        .collect();
    let mut pbest: Vec<(f64, u64)> = pos.iter().map(|&m| (cfs.merit_of_mask(m), m)).collect();
    let mut gbest = pbest[0];
    for &b in &pbest[1..] {
        if b.0 > gbest.0 {
            gbest = b;
        }
    }

    let bit = |m: u64, f: usize| ((m >> f) & 1) as f64;
    for t in 0..p.iterations {
        let frac = if p.iterations > 1 {
            t as f64 / (p.iterations - 1) as f64
        } else {
            0.0
        };
        let w = p.inertia_start - (p.inertia_start - p.inertia_end) * frac;
        for i in 0..swarm {
            let mut next = 0u64;
            for f in 0..n {
                let x = bit(pos[i], f);
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let v = w * vel[i][f]
                    + p.c1 * r1 * (bit(pbest[i].1, f) - x)
                    + p.c2 * r2 * (bit(gbest.1, f) - x);
                let v = v.clamp(-p.v_max, p.v_max);
                vel[i][f] = v;
                if rng.gen::<f64>() < sigmoid(v) {
                    next |= 1u64 << f;
                }
            }
            pos[i] = next;
            let m = cfs.merit_of_mask(next);
            if m > pbest[i].0 {
                pbest[i] = (m, next);
            }
            if m > gbest.0 {
                gbest = (m, next);
            }
        }
    }
    scored_mask(cfs, gbest.1)
}
