use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Grower, Sample, TreeConfig, TreeModel};
use super::{argmax_class, Cell, ModelSpec, TrainedModel, WeightedDataset};
use crate::dataset::AttackClass;
use crate::error::Result;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn per node; `None` means floor(sqrt(#features)).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_try: Option<usize>,
    pub bootstrap: bool,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            m_try: None,
            bootstrap: true,
            tree: TreeConfig::default(),
        }
    }
}

impl ForestConfig {
    pub fn m_try_for(&self, n_features: usize) -> usize {
        self.m_try
            .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub m_try: usize,
    pub trees: Vec<TreeModel>,
}

impl ForestModel {
    pub(crate) fn predict_cells(&self, x: &[Cell]) -> AttackClass {
        let mut votes = [0.0; 5];
        for t in &self.trees {
            votes[t.predict_cells(x).index()] += 1.0;
        }
        argmax_class(&votes)
    }
}

/// Draws `n` rows with probability proportional to weight; returns
/// per-row multiplicities.
fn weighted_bootstrap(weights: &[f64], rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut mult = vec![0u32; weights.len()];
    for _ in 0..weights.len() {
        let u = rng.gen::<f64>() * acc;
        let i = cumulative.partition_point(|&c| c <= u).min(weights.len() - 1);
        mult[i] += 1;
    }
    mult
}

pub(super) fn fit(w: &WeightedDataset, cfg: &ForestConfig, seed: u64) -> Result<ForestModel> {
    let ranked = w.base().ranked();
    let m_try = cfg.m_try_for(w.features().len());
    let grower = Grower::new(&ranked, w.features().iter(), &cfg.tree, Some(m_try));
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::substream(seed, &format!("tree/{t}")));
            if cfg.bootstrap {
                let mult = weighted_bootstrap(w.weights(), &mut rng);
                let mut rows = Vec::new();
                let mut counts = Vec::new();
                let mut weights = Vec::new();
                for (i, &m) in mult.iter().enumerate() {
                    if m > 0 {
                        rows.push(w.rows()[i]);
                        counts.push(m);
                        weights.push(m as f64);
                    }
                }
                let s = Sample {
                    rows: &rows,
                    weights: &weights,
                    mult: &counts,
                };
                grower.grow(&s, Some(&mut rng))
            } else {
                let mult = vec![1u32; w.len()];
                let s = Sample {
                    rows: w.rows(),
                    weights: w.weights(),
                    mult: &mult,
                };
                grower.grow(&s, Some(&mut rng))
            }
        })
        .collect();
    Ok(ForestModel { m_try, trees })
}

/// Trains a random forest; tree `t` depends only on (`seed`, `t`).
pub fn train_forest(w: &WeightedDataset, cfg: &ForestConfig, seed: u64) -> Result<TrainedModel> {
    super::train(&ModelSpec::Forest(cfg.clone()), w, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_draws_n_and_respects_zero_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = weighted_bootstrap(&[0.5, 0.5, 0.0], &mut rng);
        assert_eq!(m.iter().sum::<u32>(), 3);
        assert_eq!(m[2], 0);
    }
}
