//! The method × dataset search grid and its vote aggregation.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CfsEvaluator, FeatureSet, SearchConfig, SearchMethod};
use crate::dataset::{build_class_dataset, AttackClass, Dataset, FeatureId};
use crate::error::{Error, Result};
use crate::seed;

/// Row datasets of the grid: the full set and the four class-based sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GridDataset {
    #[serde(rename = "All")]
    All,
    #[serde(rename = "DOS")]
    Dos,
    #[serde(rename = "PROBE")]
    Probe,
    #[serde(rename = "R2L")]
    R2l,
    #[serde(rename = "U2R")]
    U2r,
}

impl GridDataset {
    pub const ALL: [GridDataset; 5] = [
        GridDataset::All,
        GridDataset::Dos,
        GridDataset::Probe,
        GridDataset::R2l,
        GridDataset::U2r,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridDataset::All => "All",
            GridDataset::Dos => "DOS",
            GridDataset::Probe => "PROBE",
            GridDataset::R2l => "R2L",
            GridDataset::U2r => "U2R",
        }
    }

    /// The attack class behind a class-based dataset.
    pub fn attack_class(self) -> Option<AttackClass> {
        match self {
            GridDataset::All => None,
            GridDataset::Dos => Some(AttackClass::Dos),
            GridDataset::Probe => Some(AttackClass::Probe),
            GridDataset::R2l => Some(AttackClass::R2l),
            GridDataset::U2r => Some(AttackClass::U2r),
        }
    }

    pub fn of_class(c: AttackClass) -> Option<GridDataset> {
        GridDataset::ALL
            .into_iter()
            .find(|g| g.attack_class() == Some(c))
    }

    /// Derives this row's dataset from the (deduplicated) full dataset.
    pub fn build(self, d: &Dataset) -> Result<Dataset> {
        match self.attack_class() {
            None => Ok(d.clone()),
            Some(c) => build_class_dataset(d, c),
        }
    }
}

impl fmt::Display for GridDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GridDataset::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown dataset `{s}`; valid datasets: All, DOS, PROBE, R2L, U2R"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub method: SearchMethod,
    pub dataset: GridDataset,
    pub features: FeatureSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merit: Option<f64>,
    /// Wall time; kept out of the serialized grid so it stays reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodUnion {
    pub method: SearchMethod,
    pub features: FeatureSet,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Grid {
    pub cells: Vec<GridCell>,
}

impl Grid {
    pub fn new(mut cells: Vec<GridCell>) -> Self {
        cells.sort_by_key(|c| (c.method, c.dataset));
        Self { cells }
    }

    pub fn cell(&self, method: SearchMethod, dataset: GridDataset) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.dataset == dataset)
    }

    pub fn methods(&self) -> Vec<SearchMethod> {
        let mut m: Vec<_> = self.cells.iter().map(|c| c.method).collect();
        m.dedup();
        m
    }

    pub fn datasets(&self) -> Vec<GridDataset> {
        let mut d: Vec<_> = self.cells.iter().map(|c| c.dataset).collect();
        d.sort();
        d.dedup();
        d
    }

    /// Per method, the union of its results over every dataset row.
    pub fn unions(&self) -> Vec<MethodUnion> {
        self.methods()
            .into_iter()
            .map(|method| MethodUnion {
                method,
                features: self
                    .cells
                    .iter()
                    .filter(|c| c.method == method)
                    .fold(FeatureSet::default(), |acc, c| acc.union(&c.features)),
            })
            .collect()
    }

    /// Per method, the features it picked in at least `min_rows` dataset rows.
    /// `min_rows = 1` is the union.
    pub fn recurring(&self, min_rows: usize) -> Vec<MethodUnion> {
        self.methods()
            .into_iter()
            .map(|method| {
                let mut counts = [0usize; 64];
                for c in self.cells.iter().filter(|c| c.method == method) {
                    for f in c.features.iter() {
                        counts[f.column()] += 1;
                    }
                }
                MethodUnion {
                    method,
                    features: FeatureSet::from_columns(
                        (0..64).filter(|&i| counts[i] > 0 && counts[i] >= min_rows),
                    ),
                }
            })
            .collect()
    }

    /// Matrix in the layout of the published table: one row per method,
    /// one column per dataset plus the per-method union.
    pub fn to_csv(&self) -> String {
        let datasets = self.datasets();
        let mut out = String::from("method");
        for d in &datasets {
            out.push(',');
            out.push_str(d.name());
        }
        out.push_str(",union\n");
        for u in self.unions() {
            out.push_str(u.method.tag());
            for &d in &datasets {
                let cell = self
                    .cell(u.method, d)
                    .map(|c| c.features.to_string())
                    .unwrap_or_default();
                out.push_str(&format!(",\"{cell}\""));
            }
            out.push_str(&format!(",\"{}\"\n", u.features));
        }
        out
    }
}

/// Runs every method on every dataset. Cells are independent and run in
/// parallel; each stochastic cell draws from a sub-stream named after it.
pub fn run_all_methods(
    datasets: &[(GridDataset, Dataset)],
    methods: &[SearchMethod],
    cfg: &SearchConfig,
) -> Result<Grid> {
    let evaluators: Vec<(GridDataset, CfsEvaluator)> = datasets
        .iter()
        .map(|(g, d)| {
            if d.n_features() > 64 {
                return Err(Error::Config(format!(
                    "dataset {g}: {} features exceeds the 64-feature search limit",
                    d.n_features()
                )));
            }
            if d.is_empty() {
                return Err(Error::EmptyTrainingSet.in_stage(format!("search cell dataset {g}")));
            }
            Ok((*g, CfsEvaluator::new(d)))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(SearchMethod, usize)> = methods
        .iter()
        .flat_map(|&m| (0..evaluators.len()).map(move |i| (m, i)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(method, i)| {
            let (dataset, cfs) = &evaluators[i];
            let stream = seed::substream(cfg.seed, &format!("search/{method}/{dataset}"));
            let start = Instant::now();
            let features = method.run(cfs, cfg, stream);
            GridCell {
                method,
                dataset: *dataset,
                merit: features.merit(),
                features,
                elapsed: start.elapsed(),
            }
        })
        .collect();
    Ok(Grid::new(cells))
}

/// Votes for one dataset row and the features meeting the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConsensus {
    pub dataset: GridDataset,
    /// (feature, number of methods selecting it), ascending by feature.
    pub votes: Vec<(FeatureId, usize)>,
    pub consensus: FeatureSet,
}

impl ClassConsensus {
    pub fn votes_for(&self, f: FeatureId) -> usize {
        self.votes
            .iter()
            .find(|v| v.0 == f)
            .map_or(0, |v| v.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub threshold: usize,
    pub n_methods: usize,
    pub unions: Vec<MethodUnion>,
    pub classes: Vec<ClassConsensus>,
}

impl AggregateReport {
    pub fn class(&self, d: GridDataset) -> Option<&ClassConsensus> {
        self.classes.iter().find(|c| c.dataset == d)
    }

    /// Number of per-method unions containing `f`.
    pub fn algorithm_votes(&self, f: FeatureId) -> usize {
        self.unions.iter().filter(|u| u.features.contains(f)).count()
    }

    /// Number of consensus rows containing `f`.
    pub fn class_rows(&self, f: FeatureId) -> usize {
        self.classes
            .iter()
            .filter(|c| c.consensus.contains(f))
            .count()
    }

    /// Every feature appearing anywhere in the report, ascending.
    pub fn features(&self) -> FeatureSet {
        self.unions
            .iter()
            .fold(FeatureSet::default(), |acc, u| acc.union(&u.features))
    }
}

/// Counts, per dataset row, how many methods picked each feature, and keeps
/// those with at least `vote_threshold` votes.
pub fn aggregate_consensus(grid: &Grid, vote_threshold: usize) -> AggregateReport {
    let classes = grid
        .datasets()
        .into_iter()
        .map(|dataset| {
            let mut counts = [0usize; 64];
            for c in grid.cells.iter().filter(|c| c.dataset == dataset) {
                for f in c.features.iter() {
                    counts[f.column()] += 1;
                }
            }
            let votes: Vec<(FeatureId, usize)> = counts
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(col, &n)| (FeatureId::from_column(col).expect("column in range"), n))
                .collect();
            let consensus = votes
                .iter()
                .filter(|v| v.1 >= vote_threshold)
                .map(|v| v.0)
                .collect();
            ClassConsensus {
                dataset,
                votes,
                consensus,
            }
        })
        .collect();
    AggregateReport {
        threshold: vote_threshold,
        n_methods: grid.methods().len(),
        unions: grid.unions(),
        classes,
    }
}
