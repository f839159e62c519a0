use rand::Rng;

use super::tabu::random_nonempty;
use super::{full_mask, scored_mask, SearchConfig};
use crate::featsel::{CfsEvaluator, FeatureSet};

fn tournament<R: Rng>(rng: &mut R, fitness: &[f64], size: usize) -> usize {
    let mut winner = rng.gen_range(0..fitness.len());
    for _ in 1..size.max(1) {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[winner] || (fitness[c] == fitness[winner] && c < winner) {
            winner = c;
        }
    }
    winner
}

/// Generational genetic search: tournament selection, uniform crossover,
/// per-bit mutation and one elite carried over each generation.
pub fn genetic_search(cfs: &CfsEvaluator, cfg: &SearchConfig) -> FeatureSet {
    let g = &cfg.genetic;
    let n = cfs.n_features();
    let all = full_mask(n);
    let mut rng = cfg.rng();
    let size = g.population.max(2);

    let mut pop: Vec<u64> = match &g.initial_population {
        Some(init) if !init.is_empty() => init.iter().map(|s| s.mask() & all).collect(),
        _ => (0..size).map(|_| random_nonempty(&mut rng, n)).collect(),
    };
    let mut fitness: Vec<f64> = pop.iter().map(|&m| cfs.merit_of_mask(m)).collect();
    let fittest = |fit: &[f64]| {
        (1..fit.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b })
    };
    let i = fittest(&fitness);
    let mut best = (fitness[i], pop[i]);

    for _ in 0..g.generations {
        let elite = pop[fittest(&fitness)];
        let mut next = vec![elite];
        while next.len() < size {
            let a = pop[tournament(&mut rng, &fitness, g.tournament)];
            let b = pop[tournament(&mut rng, &fitness, g.tournament)];
            let (mut c1, mut c2) = (a, b);
            if rng.gen::<f64>() < g.crossover {
                let swap = rng.gen::<u64>() & all;
                c1 = (a & !swap) | (b & swap);
                c2 = (b & !swap) | (a & swap);
            }
            for child in [&mut c1, &mut c2] {
                for f in 0..n {
                    if rng.gen::<f64>() < g.mutation {
                        *child ^= 1u64 << f;
                    }
                }
            }
            next.push(c1);
            if next.len() < size {
                next.push(c2);
            }
        }
        pop = next;
        fitness = pop.iter().map(|&m| cfs.merit_of_mask(m)).collect();
        let i = fittest(&fitness);
        if fitness[i] > best.0 {
            best = (fitness[i], pop[i]);
        }
    }
    scored_mask(cfs, best.1)
}
