//! Subset search strategies over a [`CfsEvaluator`].
//!
//! Subsets are `u64` bitmasks over 0-based columns, so at most 64 features.
//! Every strategy is a deterministic function of (evaluator, config).

mod best_first;
mod genetic;
mod pso;
mod tabu;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use best_first::best_first;
pub use genetic::genetic_search;
pub use pso::bpso_search;
pub use tabu::tabu_search;

use super::{rank_search, CfsEvaluator, FeatureSet, SingleEvaluator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    RankGainRatio,
    RankInfoGain,
    BestFirst,
    Genetic,
    Greedy,
    Pso,
    Tabu,
}

impl SearchMethod {
    pub const ALL: [SearchMethod; 7] = [
        SearchMethod::RankGainRatio,
        SearchMethod::RankInfoGain,
        SearchMethod::BestFirst,
        SearchMethod::Genetic,
        SearchMethod::Greedy,
        SearchMethod::Pso,
        SearchMethod::Tabu,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SearchMethod::RankGainRatio => "rank_gain_ratio",
            SearchMethod::RankInfoGain => "rank_info_gain",
            SearchMethod::BestFirst => "best_first",
            SearchMethod::Genetic => "genetic",
            SearchMethod::Greedy => "greedy",
            SearchMethod::Pso => "pso",
            SearchMethod::Tabu => "tabu",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            SearchMethod::RankGainRatio => "Rank Search (Gain Ratio)",
            SearchMethod::RankInfoGain => "Rank Search (Info Gain)",
            SearchMethod::BestFirst => "Best First",
            SearchMethod::Genetic => "Evolutionary Search",
            SearchMethod::Greedy => "Greedy Stepwise",
            SearchMethod::Pso => "PSO Search",
            SearchMethod::Tabu => "Tabu Search",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            SearchMethod::Genetic | SearchMethod::Pso | SearchMethod::Tabu
        )
    }

    /// Runs this method with `cfg`, using `seed` for stochastic methods.
    pub fn run(self, cfs: &CfsEvaluator, cfg: &SearchConfig, seed: u64) -> FeatureSet {
        let cfg = SearchConfig { seed, ..cfg.clone() };
        match self {
            SearchMethod::RankGainRatio => rank_search(cfs, SingleEvaluator::GainRatio),
            SearchMethod::RankInfoGain => rank_search(cfs, SingleEvaluator::InfoGain),
            SearchMethod::BestFirst => best_first(cfs, cfg.best_first.stale_limit),
            SearchMethod::Genetic => genetic_search(cfs, &cfg),
            SearchMethod::Greedy => greedy_stepwise(cfs),
            SearchMethod::Pso => bpso_search(cfs, &cfg),
            SearchMethod::Tabu => tabu_search(cfs, &cfg),
        }
    }
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SearchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let m = match key.as_str() {
            "rank_gain_ratio" | "rank_gr" => SearchMethod::RankGainRatio,
            "rank_info_gain" | "rank_ig" => SearchMethod::RankInfoGain,
            "best_first" | "bestfirst" => SearchMethod::BestFirst,
            "genetic" | "evolutionary" | "ga" => SearchMethod::Genetic,
            "greedy" | "greedy_stepwise" => SearchMethod::Greedy,
            "pso" | "bpso" => SearchMethod::Pso,
            "tabu" => SearchMethod::Tabu,
            _ => {
                let valid: Vec<&str> = SearchMethod::ALL.iter().map(|m| m.tag()).collect();
                return Err(Error::Config(format!(
                    "unknown search method `{s}`; valid methods: {}",
                    valid.join(", ")
                )));
            }
        };
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BestFirstParams {
    pub stale_limit: usize,
}

impl Default for BestFirstParams {
    fn default() -> Self {
        Self { stale_limit: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TabuParams {
    pub tenure: usize,
    pub iterations: usize,
}

impl Default for TabuParams {
    fn default() -> Self {
        Self {
            tenure: 5,
            iterations: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub swarm: usize,
    pub iterations: usize,
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm: 20,
            iterations: 50,
            inertia_start: 0.9,
            inertia_end: 0.4,
            c1: 2.0,
            c2: 2.0,
            v_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneticParams {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub tournament: usize,
    /// Replaces the random initial population when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_population: Option<Vec<FeatureSet>>,
}

impl Default for GeneticParams {
    fn default() -> Self {
        Self {
            population: 20,
            generations: 20,
            crossover: 0.6,
            mutation: 0.033,
            tournament: 2,
            initial_population: None,
        }
    }
}

/// Parameters for every strategy; stochastic ones draw from `seed`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub seed: u64,
    pub best_first: BestFirstParams,
    pub tabu: TabuParams,
    pub pso: PsoParams,
    pub genetic: GeneticParams,
}

impl SearchConfig {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn scored_mask(cfs: &CfsEvaluator, mask: u64) -> FeatureSet {
    let set = FeatureSet::from_mask(mask);
    let merit = cfs.merit_of(&set.columns());
    set.with_merit(merit)
}

/// Forward selection from the empty set. The first feature is always taken;
/// afterwards each step adds the feature with the largest merit gain, lowest
/// index on ties, and stops when nothing improves.
pub fn greedy_stepwise(cfs: &CfsEvaluator) -> FeatureSet {
    greedy_stepwise_trace(cfs).0
}

/// Greedy result plus the merit after each accepted step.
pub fn greedy_stepwise_trace(cfs: &CfsEvaluator) -> (FeatureSet, Vec<f64>) {
    let n = cfs.n_features();
    let mut mask = 0u64;
    let mut current = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for f in 0..n {
            if mask & (1 << f) != 0 {
                continue;
            }
            let m = cfs.merit_of_mask(mask | (1 << f));
            if best.map_or(true, |(_, b)| m > b) {
                best = Some((f, m));
            }
        }
        match best {
            Some((f, m)) if m > current => {
                mask |= 1 << f;
                current = m;
                trace.push(m);
            }
            _ => break,
        }
    }
    (scored_mask(cfs, mask), trace)
}
