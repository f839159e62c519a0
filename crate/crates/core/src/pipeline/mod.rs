//! Guarded feature reduction and the Gradually-ADD / Gradually-DELETE
//! selection procedures.

mod stages;
mod start;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use stages::{gradual_add, gradual_delete, reduce_features, select_best, BestSelection, PhaseResult};
pub use start::{build_start_set, class_rankings, vote_rankings, StartSet, StartSetConfig};

use crate::classifiers::ModelSpec;
use crate::dataset::{AttackClass, Dataset, FeatureId};
use crate::error::Result;
use crate::evaluation::{stratified_kfold, CVConfig, MetricsReport};
use crate::featsel::FeatureSet;

/// Acceptance rule for a selection step: overall accuracy and every class's
/// TPR must stay at or above their previous values minus `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuardPolicy {
    pub epsilon: f64,
}

impl Default for GuardPolicy {
    fn default() -> Self {
        Self { epsilon: 0.001 }
    }
}

impl GuardPolicy {
    pub fn disabled() -> Self {
        Self {
            epsilon: f64::INFINITY,
        }
    }

    /// `Ok(())` when the step is acceptable, otherwise the first violation.
    pub fn check(&self, before: &MetricsReport, after: &MetricsReport) -> Result<(), String> {
        if after.accuracy < before.accuracy - self.epsilon {
            return Err(format!(
                "accuracy {:.6} < {:.6} - {}",
                after.accuracy, before.accuracy, self.epsilon
            ));
        }
        for c in before.supported_classes() {
            let (b, a) = (before.tpr(c), after.tpr(c));
            if a < b - self.epsilon {
                return Err(format!("{c} TPR {a:.6} < {b:.6} - {}", self.epsilon));
            }
        }
        Ok(())
    }
}

/// Scores a feature set; implementations must be deterministic.
pub trait SetEvaluator: Sync {
    fn evaluate(&self, features: &FeatureSet) -> Result<MetricsReport>;
}

/// Cross-validated evaluation with fixed folds, cached per feature set.
/// Reusing the folds keeps successive comparisons paired.
pub struct CvEvaluator<'a> {
    data: &'a Dataset,
    spec: ModelSpec,
    cv: CVConfig,
    cache: Mutex<HashMap<FeatureSet, MetricsReport>>,
}

impl<'a> CvEvaluator<'a> {
    pub fn new(data: &'a Dataset, spec: ModelSpec, cv: CVConfig) -> Self {
        Self {
            data,
            spec,
            cv,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Number of distinct feature sets evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl SetEvaluator for CvEvaluator<'_> {
    fn evaluate(&self, features: &FeatureSet) -> Result<MetricsReport> {
        if let Some(r) = self.cache.lock().expect("cache lock").get(features) {
            return Ok(r.clone());
        }
        let report = stratified_kfold(self.data, &self.cv, &self.spec, features)?.report;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(features.clone(), report.clone());
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Add,
    Delete,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Add => "add",
            Action::Delete => "delete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub action: Action,
    pub feature: FeatureId,
    /// Class whose important-feature pass proposed the step, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<AttackClass>,
    pub metrics_before: MetricsReport,
    pub metrics_after: MetricsReport,
    pub accepted: bool,
    pub reason: String,
}

/// Ordered log of every evaluated step of one procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub procedure: String,
    pub start: FeatureSet,
    pub steps: Vec<Step>,
    pub final_set: FeatureSet,
}

impl SelectionTrace {
    pub(crate) fn new(procedure: &str, start: &FeatureSet) -> Self {
        Self {
            procedure: procedure.into(),
            start: FeatureSet::new(start.iter()),
            steps: Vec::new(),
            final_set: FeatureSet::new(start.iter()),
        }
    }

    /// Applies the accepted steps to the start set.
    pub fn replay(&self) -> FeatureSet {
        self.steps
            .iter()
            .filter(|s| s.accepted)
            .fold(FeatureSet::new(self.start.iter()), |set, s| match s.action {
                Action::Add => set.inserted(s.feature),
                Action::Delete => set.removed(s.feature),
            })
    }

    /// Whether every accepted step satisfies `guard` on its stored reports.
    pub fn guard_holds(&self, guard: &GuardPolicy) -> bool {
        self.steps
            .iter()
            .filter(|s| s.accepted)
            .all(|s| guard.check(&s.metrics_before, &s.metrics_after).is_ok())
    }

    pub fn accepted(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| s.accepted)
    }
}
