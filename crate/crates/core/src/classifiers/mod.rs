//! Learners: naive Bayes, a C4.5-style tree, random forest and AdaBoost.M1.
//!
//! Every learner trains on a [`WeightedDataset`] and yields a
//! [`TrainedModel`] that serializes to JSON and reloads bit-identically.

mod adaboost;
mod naive_bayes;
mod ranked;
mod tree;
mod forest;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use adaboost::{train_adaboost_m1, train_adaboost_m1_traced, AdaBoostModel, BoostRound};
pub use forest::{train_forest, ForestConfig, ForestModel};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel};
pub(crate) use ranked::RankedColumns;
pub use tree::{train_tree, Node, TreeConfig, TreeModel};

use crate::dataset::{AttackClass, Column, Dataset, FeatureId, Value};
use crate::error::{Error, Result};
use crate::featsel::FeatureSet;

/// Training rows of a dataset restricted to a feature set, with normalized
/// strictly positive weights. Rows are kept in ascending order and merged
/// when repeated, so the view does not depend on the order it was given in.
#[derive(Debug, Clone)]
pub struct WeightedDataset<'a> {
    base: &'a Dataset,
    features: FeatureSet,
    rows: Vec<usize>,
    weights: Vec<f64>,
}

impl<'a> WeightedDataset<'a> {
    /// All rows of `base`, equally weighted.
    pub fn uniform(base: &'a Dataset, features: FeatureSet) -> Result<Self> {
        Self::subset(base, features, (0..base.len()).collect())
    }

    /// `rows` of `base`, equally weighted.
    pub fn subset(base: &'a Dataset, features: FeatureSet, rows: Vec<usize>) -> Result<Self> {
        let weights = vec![1.0; rows.len()];
        Self::new(base, features, rows, weights)
    }

    pub fn new(
        base: &'a Dataset,
        features: FeatureSet,
        rows: Vec<usize>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        if let Some(f) = features.iter().find(|&f| !base.schema().contains(f)) {
            return Err(Error::FeatureNotInSchema(f));
        }
        if rows.len() != weights.len() {
            return Err(Error::LengthMismatch(rows.len(), weights.len()));
        }
        if rows.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= base.len()) {
            return Err(Error::Config(format!(
                "row {r} out of range for a dataset of {} records",
                base.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("instance weights must be finite and > 0".into()));
        }
        let mut pairs: Vec<(usize, f64)> = rows.into_iter().zip(weights).collect();
        pairs.sort_by_key(|p| p.0);
        let mut rows = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (r, w) in pairs {
            if rows.last() == Some(&r) {
                *weights.last_mut().expect("paired") += w;
            } else {
                rows.push(r);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            base,
            features,
            rows,
            weights,
        })
    }

    /// Same rows and features with new weights (aligned with [`Self::rows`]).
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.base, self.features.clone(), self.rows.clone(), weights)
    }

    pub fn base(&self) -> &'a Dataset {
        self.base
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_of(&self, i: usize) -> AttackClass {
        self.base.class(self.rows[i])
    }

    /// Total weight per class, indexed by [`AttackClass::index`].
    pub fn class_weights(&self) -> [f64; 5] {
        let mut w = [0.0; 5];
        for (i, &x) in self.weights.iter().enumerate() {
            w[self.class_of(i).index()] += x;
        }
        w
    }

    pub(crate) fn vocab(&self) -> Vec<SymbolicVocab> {
        self.features
            .iter()
            .filter_map(|f| match self.base.column(f) {
                Column::Symbolic { vocab, .. } => Some(SymbolicVocab {
                    feature: f,
                    tokens: vocab.clone(),
                }),
                Column::Numeric(_) => None,
            })
            .collect()
    }
}

/// Token list of a symbolic feature as seen at training time; models refer
/// to tokens by position in this list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicVocab {
    pub feature: FeatureId,
    pub tokens: Vec<String>,
}

/// One encoded input value; `Code(UNSEEN)` marks a token unknown at training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Cell {
    Num(f64),
    Code(u32),
}

pub(crate) const UNSEEN: u32 = u32::MAX;

/// Index of the largest score; the lower class wins ties.
pub(crate) fn argmax_class(scores: &[f64; 5]) -> AttackClass {
    let mut best = 0;
    for i in 1..5 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    AttackClass::from_index(best).expect("index < 5")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    NaiveBayes,
    Tree(TreeConfig),
    Forest(ForestConfig),
    #[serde(rename = "adaboost")]
    AdaBoost { base: Box<ModelSpec>, rounds: usize },
}

impl Default for ModelSpec {
    /// AdaBoost.M1 over a 100-tree random forest, 10 rounds.
    fn default() -> Self {
        ModelSpec::AdaBoost {
            base: Box::new(ModelSpec::Forest(ForestConfig::default())),
            rounds: 10,
        }
    }
}

impl ModelSpec {
    /// The cheaper ensemble used inside selection loops.
    pub fn budgeted() -> Self {
        ModelSpec::AdaBoost {
            base: Box::new(ModelSpec::Forest(ForestConfig {
                n_trees: 25,
                ..ForestConfig::default()
            })),
            rounds: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::NaiveBayes | ModelSpec::Tree(_) => Ok(()),
            ModelSpec::Forest(c) if c.n_trees == 0 => {
                Err(Error::Config("forest needs at least one tree".into()))
            }
            ModelSpec::Forest(_) => Ok(()),
            ModelSpec::AdaBoost { rounds: 0, .. } => {
                Err(Error::Config("boosting needs at least one round".into()))
            }
            ModelSpec::AdaBoost { base, .. } => base.validate(),
        }
    }
}

/// Fitted parameters of one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Model {
    NaiveBayes(NaiveBayesModel),
    Tree(TreeModel),
    Forest(ForestModel),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostModel),
}

impl Model {
    pub(crate) fn predict_cells(&self, x: &[Cell]) -> AttackClass {
        match self {
            Model::NaiveBayes(m) => m.predict_cells(x),
            Model::Tree(m) => m.predict_cells(x),
            Model::Forest(m) => m.predict_cells(x),
            Model::AdaBoost(m) => m.predict_cells(x),
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            Model::NaiveBayes(_) => "naive_bayes",
            Model::Tree(_) => "tree",
            Model::Forest(_) => "forest",
            Model::AdaBoost(_) => "adaboost",
        }
    }
}

pub(crate) fn fit(spec: &ModelSpec, w: &WeightedDataset, seed: u64) -> Result<Model> {
    match spec {
        ModelSpec::NaiveBayes => naive_bayes::fit(w).map(Model::NaiveBayes),
        ModelSpec::Tree(cfg) => Ok(Model::Tree(tree::fit(w, cfg))),
        ModelSpec::Forest(cfg) => forest::fit(w, cfg, seed).map(Model::Forest),
        ModelSpec::AdaBoost { base, rounds } => {
            adaboost::fit(base, w, *rounds, seed).map(Model::AdaBoost)
        }
    }
}

/// A fitted classifier together with what it needs to score new records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub features: FeatureSet,
    pub seed: u64,
    pub classes: Vec<AttackClass>,
    pub vocab: Vec<SymbolicVocab>,
    pub model: Model,
    #[serde(skip)]
    pub build_time: Duration,
}

/// Trains `spec` on `w`. Stochastic learners draw from `seed`.
pub fn train(spec: &ModelSpec, w: &WeightedDataset, seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    let start = Instant::now();
    let model = fit(spec, w, seed)?;
    let cw = w.class_weights();
    Ok(TrainedModel {
        features: w.features().clone(),
        seed,
        classes: AttackClass::ALL
            .into_iter()
            .filter(|c| cw[c.index()] > 0.0)
            .collect(),
        vocab: w.vocab(),
        model,
        build_time: start.elapsed(),
    })
}

impl TrainedModel {
    pub fn variant(&self) -> &'static str {
        self.model.variant()
    }

    fn vocab_of(&self, f: FeatureId) -> Option<&[String]> {
        self.vocab
            .iter()
            .find(|v| v.feature == f)
            .map(|v| v.tokens.as_slice())
    }

    fn check_features(&self, got: &FeatureSet) -> Result<()> {
        if got != &self.features {
            return Err(Error::FeatureMismatch {
                expected: self.features.to_string(),
                got: got.to_string(),
            });
        }
        Ok(())
    }

    /// Classifies one record given as values for `features`, in ascending
    /// feature order.
    pub fn predict(&self, features: &FeatureSet, values: &[Value]) -> Result<AttackClass> {
        self.check_features(features)?;
        if values.len() != features.len() {
            return Err(Error::LengthMismatch(features.len(), values.len()));
        }
        let cells = features
            .iter()
            .zip(values)
            .map(|(f, v)| match (self.vocab_of(f), v) {
                (None, Value::Number(x)) => Ok(Cell::Num(*x)),
                (Some(tokens), Value::Token(t)) => Ok(Cell::Code(
                    tokens
                        .iter()
                        .position(|s| s == t)
                        .map_or(UNSEEN, |p| p as u32),
                )),
                _ => Err(Error::Schema(format!("feature {f}: value kind differs from training"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.model.predict_cells(&cells))
    }

    /// Classifies the given rows of `d`.
    pub fn predict_rows(&self, d: &Dataset, rows: &[usize]) -> Result<Vec<AttackClass>> {
        let enc = Encoder::new(self, d)?;
        Ok(rows
            .par_chunks(1024)
            .flat_map_iter(|chunk| {
                let mut buf = Vec::with_capacity(enc.slots.len());
                chunk
                    .iter()
                    .map(|&r| {
                        enc.encode(r, &mut buf);
                        self.model.predict_cells(&buf)
                    })
                    .collect::<Vec<_>>()
            })
            .collect())
    }

    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<AttackClass>> {
        let rows: Vec<usize> = (0..d.len()).collect();
        self.predict_rows(d, &rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

enum Slot<'d> {
    Num(&'d [f64]),
    /// Dataset codes with their translation into training codes.
    Code(&'d [u32], Vec<u32>),
}

/// Maps dataset rows onto a model's input layout.
struct Encoder<'d> {
    slots: Vec<Slot<'d>>,
}

impl<'d> Encoder<'d> {
    fn new(m: &TrainedModel, d: &'d Dataset) -> Result<Self> {
        let slots = m
            .features
            .iter()
            .map(|f| {
                if !d.schema().contains(f) {
                    return Err(Error::FeatureNotInSchema(f));
                }
                match (d.column(f), m.vocab_of(f)) {
                    (Column::Numeric(v), None) => Ok(Slot::Num(v)),
                    (Column::Symbolic { codes, vocab }, Some(tokens)) => {
                        let map = vocab
                            .iter()
                            .map(|t| tokens.iter().position(|s| s == t).map_or(UNSEEN, |p| p as u32))
                            .collect();
                        Ok(Slot::Code(codes, map))
                    }
                    _ => Err(Error::Schema(format!(
                        "feature {f}: column kind differs from training"
                    ))),
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { slots })
    }

    fn encode(&self, row: usize, out: &mut Vec<Cell>) {
        out.clear();
        out.extend(self.slots.iter().map(|s| match s {
            Slot::Num(v) => Cell::Num(v[row]),
            Slot::Code(codes, map) => Cell::Code(map[codes[row] as usize]),
        }));
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::dataset::{AttackClass, Dataset, Schema};

    /// Numeric dataset from rows of (values, class).
    pub fn numeric(rows: &[(&[f64], AttackClass)]) -> Dataset {
        let n = rows.first().map_or(1, |r| r.0.len());
        let mut b = Dataset::builder(Schema::numeric(n).unwrap());
        for (v, c) in rows {
            b.push_numeric(v, *c).unwrap();
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::numeric;
    use super::*;
    use AttackClass::{Dos, Normal};

    #[test]
    fn weighted_view_is_order_free_and_normalized() {
        let d = numeric(&[(&[0.0], Normal), (&[1.0], Dos), (&[2.0], Dos)]);
        let fs = FeatureSet::all(1);
        let a = WeightedDataset::new(&d, fs.clone(), vec![2, 0, 1, 0], vec![1.0, 2.0, 1.0, 2.0])
            .unwrap();
        assert_eq!(a.rows(), &[0, 1, 2]);
        let s: f64 = a.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((a.weights()[0] - 4.0 / 6.0).abs() < 1e-12);
        assert!(WeightedDataset::new(&d, fs.clone(), vec![0], vec![0.0]).is_err());
        assert!(WeightedDataset::new(&d, fs, vec![], vec![]).is_err());
    }

    #[test]
    fn argmax_prefers_lower_class_on_ties() {
        assert_eq!(argmax_class(&[1.0, 1.0, 0.0, 0.0, 0.0]), Normal);
        assert_eq!(argmax_class(&[0.0, 2.0, 2.0, 0.0, 0.0]), Dos);
    }

    #[test]
    fn feature_mismatch_is_rejected() {
        let d = numeric(&[(&[0.0, 1.0], Normal), (&[1.0, 0.0], Dos)]);
        let w = WeightedDataset::uniform(&d, FeatureSet::all(2)).unwrap();
        let m = train(&ModelSpec::NaiveBayes, &w, 0).unwrap();
        let other = FeatureSet::all(1);
        assert!(matches!(
            m.predict(&other, &[Value::Number(0.0)]),
            Err(Error::FeatureMismatch { .. })
        ));
    }
}
