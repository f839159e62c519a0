//! Confusion matrices, the one-vs-rest metric suite and stratified k-fold
//! cross-validation.

mod cv;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use cv::{fold_assignment, stratified_kfold, CVConfig, CvResult};

use crate::dataset::AttackClass;
use crate::error::{Error, Result};

/// 5×5 counts over [`AttackClass::ALL`]; rows are actual, columns predicted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<AttackClass>,
    pub counts: [[u64; 5]; 5],
}

/// One-vs-rest collapse of a confusion matrix for one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn empty() -> Self {
        Self {
            classes: AttackClass::ALL.to_vec(),
            counts: [[0; 5]; 5],
        }
    }

    pub fn record(&mut self, actual: AttackClass, predicted: AttackClass) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn get(&self, actual: AttackClass, predicted: AttackClass) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for r in 0..5 {
            for c in 0..5 {
                self.counts[r][c] += other.counts[r][c];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..5).map(|i| self.counts[i][i]).sum()
    }

    /// Records whose actual class is `c`.
    pub fn support(&self, c: AttackClass) -> u64 {
        self.counts[c.index()].iter().sum()
    }

    pub fn binary(&self, c: AttackClass) -> BinaryCounts {
        let i = c.index();
        let tp = self.counts[i][i];
        let fn_ = self.support(c) - tp;
        let fp = (0..5).map(|r| self.counts[r][i]).sum::<u64>() - tp;
        let tn = self.total() - tp - fn_ - fp;
        BinaryCounts { tp, fp, fn_, tn }
    }

    /// Actual-by-predicted grid with header row and column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("actual\\predicted");
        for c in AttackClass::ALL {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for a in AttackClass::ALL {
            out.push_str(a.name());
            for p in AttackClass::ALL {
                out.push_str(&format!(",{}", self.get(a, p)));
            }
            out.push('\n');
        }
        out
    }
}

/// Tallies actual against predicted classes.
pub fn confusion(actual: &[AttackClass], predicted: &[AttackClass]) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch(actual.len(), predicted.len()));
    }
    let mut cm = ConfusionMatrix::empty();
    for (&a, &p) in actual.iter().zip(predicted) {
        cm.record(a, p);
    }
    Ok(cm)
}

/// Ratios derived from one binary collapse. A ratio with a zero denominator
/// is reported as 0 and its name listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub tpr: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub npv: f64,
    pub ppv: f64,
    pub f_measure: f64,
    pub mcc: f64,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl BinaryCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn metrics(&self) -> BinaryMetrics {
        let (tp, fp, fn_, tn) = (
            self.tp as f64,
            self.fp as f64,
            self.fn_ as f64,
            self.tn as f64,
        );
        let mut undefined = Vec::new();
        let mut ratio = |name: &str, num: f64, den: f64| {
            if den > 0.0 {
                num / den
            } else {
                undefined.push(name.to_string());
                0.0
            }
        };
        let tpr = ratio("tpr", tp, tp + fn_);
        let specificity = ratio("specificity", tn, tn + fp);
        let npv = ratio("npv", tn, tn + fn_);
        let ppv = ratio("ppv", tp, tp + fp);
        let f_measure = ratio("f_measure", 2.0 * tp, 2.0 * tp + fp + fn_);
        let mcc_den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        let mcc = ratio("mcc", tp * tn - fp * fn_, mcc_den).clamp(-1.0, 1.0);
        let accuracy = ratio("accuracy", tp + tn, tp + tn + fp + fn_);
        let fpr = if tn + fp > 0.0 {
            1.0 - specificity
        } else {
            undefined.push("fpr".into());
            0.0
        };
        BinaryMetrics {
            tpr,
            specificity,
            fpr,
            npv,
            ppv,
            f_measure,
            mcc,
            accuracy,
            undefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: AttackClass,
    pub support: u64,
    pub counts: BinaryCounts,
    #[serde(flatten)]
    pub metrics: BinaryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Correctly classified fraction (the mean over folds for CV reports).
    pub accuracy: f64,
    pub instances: u64,
    pub per_class: Vec<ClassMetrics>,
    /// Micro-averaged one-vs-rest metrics.
    pub overall: BinaryMetrics,
    /// Wall-clock model build time; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub build_time: Duration,
}

impl MetricsReport {
    pub fn class(&self, c: AttackClass) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|m| m.class == c)
    }

    /// TPR of `c`; 0 when the class has no records.
    pub fn tpr(&self, c: AttackClass) -> f64 {
        self.class(c).map_or(0.0, |m| m.metrics.tpr)
    }

    /// Classes with at least one actual record.
    pub fn supported_classes(&self) -> Vec<AttackClass> {
        self.per_class
            .iter()
            .filter(|m| m.support > 0)
            .map(|m| m.class)
            .collect()
    }

    pub fn min_tpr(&self) -> f64 {
        self.per_class
            .iter()
            .filter(|m| m.support > 0)
            .map(|m| m.metrics.tpr)
            .fold(f64::INFINITY, f64::min)
            .min(1.0)
    }

    pub fn mean_tpr(&self) -> f64 {
        let s: Vec<f64> = self
            .per_class
            .iter()
            .filter(|m| m.support > 0)
            .map(|m| m.metrics.tpr)
            .collect();
        if s.is_empty() {
            0.0
        } else {
            s.iter().sum::<f64>() / s.len() as f64
        }
    }

    /// Long-format rows `class,metric,feature_set,value` for charting.
    pub fn plot_rows(&self, tag: &str) -> String {
        let mut out = String::new();
        let mut emit = |class: &str, m: &BinaryMetrics| {
            for (name, v) in [
                ("tpr", m.tpr),
                ("specificity", m.specificity),
                ("fpr", m.fpr),
                ("npv", m.npv),
                ("ppv", m.ppv),
                ("f_measure", m.f_measure),
                ("mcc", m.mcc),
                ("accuracy", m.accuracy),
            ] {
                out.push_str(&format!("{class},{name},{tag},{v}\n"));
            }
        };
        for m in self.per_class.iter().filter(|m| m.support > 0) {
            emit(m.class.name(), &m.metrics);
        }
        emit("OVERALL", &self.overall);
        out
    }
}

pub const PLOT_HEADER: &str = "class,metric,feature_set,value\n";

/// Derives every metric from a confusion matrix.
pub fn compute_metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let per_class = AttackClass::ALL
        .into_iter()
        .map(|c| {
            let counts = cm.binary(c);
            ClassMetrics {
                class: c,
                support: cm.support(c),
                counts,
                metrics: counts.metrics(),
            }
        })
        .collect::<Vec<_>>();
    let micro = per_class.iter().fold(
        BinaryCounts {
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: 0,
        },
        |acc, m| BinaryCounts {
            tp: acc.tp + m.counts.tp,
            fp: acc.fp + m.counts.fp,
            fn_: acc.fn_ + m.counts.fn_,
            tn: acc.tn + m.counts.tn,
        },
    );
    let total = cm.total();
    MetricsReport {
        accuracy: if total > 0 {
            cm.correct() as f64 / total as f64
        } else {
            0.0
        },
        instances: total,
        per_class,
        overall: micro.metrics(),
        build_time: Duration::ZERO,
    }
}
