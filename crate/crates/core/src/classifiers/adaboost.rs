use serde::{Deserialize, Serialize};

use super::{argmax_class, fit as fit_model, Cell, Model, ModelSpec, TrainedModel, WeightedDataset};
use crate::dataset::{AttackClass, Column};
use crate::error::{Error, Result};
use crate::seed;

/// Smallest β kept, so a perfect round gets a finite vote.
const MIN_BETA: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    /// Weighted training error ε.
    pub error: f64,
    /// Vote weight log(1/β).
    pub vote: f64,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub rounds: Vec<BoostRound>,
}

impl AdaBoostModel {
    pub(crate) fn predict_cells(&self, x: &[Cell]) -> AttackClass {
        let mut votes = [0.0; 5];
        for r in &self.rounds {
            votes[r.model.predict_cells(x).index()] += r.vote;
        }
        argmax_class(&votes)
    }
}

/// Training rows encoded with the training vocabulary (identity codes).
fn encode_training(w: &WeightedDataset) -> Vec<Cell> {
    let cols: Vec<&Column> = w.features().iter().map(|f| w.base().column(f)).collect();
    let mut out = Vec::with_capacity(w.len() * cols.len());
    for &r in w.rows() {
        for c in &cols {
            out.push(match c {
                Column::Numeric(v) => Cell::Num(v[r]),
                Column::Symbolic { codes, .. } => Cell::Code(codes[r]),
            });
        }
    }
    out
}

pub(super) fn fit(
    base: &ModelSpec,
    w: &WeightedDataset,
    rounds: usize,
    seed: u64,
) -> Result<AdaBoostModel> {
    boost(base, w, rounds, seed, |_, _| {})
}

/// AdaBoost.M1; `observe` sees the normalized weights after each kept round.
fn boost(
    base: &ModelSpec,
    w: &WeightedDataset,
    rounds: usize,
    seed: u64,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<AdaBoostModel> {
    let k = w.features().len();
    let cells = encode_training(w);
    let mut weights = w.weights().to_vec();
    let mut kept = Vec::new();
    for t in 0..rounds {
        let current = w.reweighted(weights.clone())?;
        weights = current.weights().to_vec();
        let model = fit_model(base, &current, seed::substream(seed, &format!("round/{t}")))
            .map_err(|e| Error::BoostRound {
                round: t,
                source: Box::new(e),
            })?;
        let correct: Vec<bool> = (0..w.len())
            .map(|i| model.predict_cells(&cells[i * k..(i + 1) * k]) == w.class_of(i))
            .collect();
        let error: f64 = weights
            .iter()
            .zip(&correct)
            .filter(|(_, &ok)| !ok)
            .map(|(x, _)| x)
            .sum();
        if error >= 0.5 {
            if kept.is_empty() {
                return Err(Error::EmptyEnsemble(error));
            }
            break;
        }
        let beta = (error / (1.0 - error)).max(MIN_BETA);
        kept.push(BoostRound {
            error,
            vote: (1.0 / beta).ln(),
            model,
        });
        if error <= 0.0 {
            observe(t, &weights);
            break;
        }
        for (x, &ok) in weights.iter_mut().zip(&correct) {
            if ok {
                *x *= beta;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|x| *x /= total);
        observe(t, &weights);
    }
    Ok(AdaBoostModel { rounds: kept })
}

/// Trains AdaBoost.M1 with `base` as the weak learner, passing instance
/// weights directly to it.
pub fn train_adaboost_m1(
    base: &ModelSpec,
    w: &WeightedDataset,
    rounds: usize,
    seed: u64,
) -> Result<TrainedModel> {
    super::train(
        &ModelSpec::AdaBoost {
            base: Box::new(base.clone()),
            rounds,
        },
        w,
        seed,
    )
}

/// Like [`train_adaboost_m1`], also returning the weight vector after each
/// kept round.
pub fn train_adaboost_m1_traced(
    base: &ModelSpec,
    w: &WeightedDataset,
    rounds: usize,
    seed: u64,
) -> Result<(AdaBoostModel, Vec<Vec<f64>>)> {
    let mut trace = Vec::new();
    let model = boost(base, w, rounds, seed, |_, ws| trace.push(ws.to_vec()))?;
    Ok((model, trace))
}
