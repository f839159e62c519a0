use serde::{Deserialize, Serialize};

use super::{argmax_class, Cell, TrainedModel, WeightedDataset, UNSEEN};
use crate::dataset::{AttackClass, Column};
use crate::error::{Error, Result};

/// Standard deviation floor for Gaussian likelihoods.
const MIN_STD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NbFeature {
    /// Per-class mean and standard deviation.
    Gaussian { mean: Vec<f64>, std: Vec<f64> },
    /// Per-class log-probability of each training token, plus the
    /// smoothed log-probability of a token never seen at training.
    Categorical {
        log_prob: Vec<Vec<f64>>,
        log_unseen: Vec<f64>,
    },
}

/// Class-conditional independence model over the classes seen in training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub classes: Vec<AttackClass>,
    pub log_prior: Vec<f64>,
    pub features: Vec<NbFeature>,
}

pub(super) fn fit(w: &WeightedDataset) -> Result<NaiveBayesModel> {
    let cw = w.class_weights();
    let n = w.len() as f64;
    let present: Vec<AttackClass> = AttackClass::ALL
        .into_iter()
        .filter(|c| w.rows().iter().any(|&r| w.base().class(r) == *c))
        .collect();
    if let Some(&c) = present.iter().find(|c| cw[c.index()] <= 0.0) {
        return Err(Error::ZeroWeightClass(c));
    }
    let slot_of = |c: AttackClass| present.iter().position(|&p| p == c).expect("present");
    // weights rescaled to sum to the record count so smoothing matches counts
    let scaled: Vec<f64> = w.weights().iter().map(|x| x * n).collect();
    let k = present.len();
    let class_total: Vec<f64> = present.iter().map(|c| cw[c.index()] * n).collect();

    let features = w
        .features()
        .iter()
        .map(|f| match w.base().column(f) {
            Column::Numeric(v) => {
                let mut sum = vec![0.0; k];
                for (i, &r) in w.rows().iter().enumerate() {
                    sum[slot_of(w.class_of(i))] += scaled[i] * v[r];
                }
                let mean: Vec<f64> = sum.iter().zip(&class_total).map(|(s, t)| s / t).collect();
                let mut sq = vec![0.0; k];
                for (i, &r) in w.rows().iter().enumerate() {
                    let c = slot_of(w.class_of(i));
                    sq[c] += scaled[i] * (v[r] - mean[c]).powi(2);
                }
                let std = sq
                    .iter()
                    .zip(&class_total)
                    .map(|(s, t)| (s / t).sqrt().max(MIN_STD))
                    .collect();
                NbFeature::Gaussian { mean, std }
            }
            Column::Symbolic { codes, vocab } => {
                let v = vocab.len();
                let mut counts = vec![vec![0.0; v]; k];
                for (i, &r) in w.rows().iter().enumerate() {
                    counts[slot_of(w.class_of(i))][codes[r] as usize] += scaled[i];
                }
                // Laplace with one extra slot for unseen tokens
                let denom: Vec<f64> = class_total.iter().map(|t| t + v as f64 + 1.0).collect();
                NbFeature::Categorical {
                    log_prob: counts
                        .iter()
                        .zip(&denom)
                        .map(|(row, d)| row.iter().map(|c| ((c + 1.0) / d).ln()).collect())
                        .collect(),
                    log_unseen: denom.iter().map(|d| (1.0 / d).ln()).collect(),
                }
            }
        })
        .collect();

    Ok(NaiveBayesModel {
        log_prior: class_total.iter().map(|t| (t / n).ln()).collect(),
        classes: present,
        features,
    })
}

impl NaiveBayesModel {
    /// Unnormalized log-posterior per training class.
    pub(crate) fn log_joint(&self, x: &[Cell]) -> Vec<f64> {
        let mut out = self.log_prior.clone();
        for (feat, cell) in self.features.iter().zip(x) {
            for (c, acc) in out.iter_mut().enumerate() {
                *acc += match (feat, *cell) {
                    (NbFeature::Gaussian { mean, std }, Cell::Num(v)) => {
                        let z = (v - mean[c]) / std[c];
                        -0.5 * z * z - std[c].ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
                    }
                    (NbFeature::Categorical { log_prob, log_unseen }, Cell::Code(code)) => {
                        if code == UNSEEN {
                            log_unseen[c]
                        } else {
                            log_prob[c][code as usize]
                        }
                    }
                    _ => 0.0,
                };
            }
        }
        out
    }

    /// Normalized posterior per training class.
    #[cfg(test)]
    pub(crate) fn posteriors(&self, x: &[Cell]) -> Vec<f64> {
        let lj = self.log_joint(x);
        let m = lj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = lj.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }

    pub(crate) fn predict_cells(&self, x: &[Cell]) -> AttackClass {
        let mut scores = [f64::NEG_INFINITY; 5];
        for (c, v) in self.classes.iter().zip(self.log_joint(x)) {
            scores[c.index()] = v;
        }
        argmax_class(&scores)
    }
}

/// Trains a naive Bayes model with Gaussian continuous and Laplace-smoothed
/// symbolic likelihoods.
pub fn train_naive_bayes(w: &WeightedDataset) -> Result<TrainedModel> {
    super::train(&super::ModelSpec::NaiveBayes, w, 0)
}
