use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_metrics, confusion, ConfusionMatrix, MetricsReport};
use crate::classifiers::{train, ModelSpec, WeightedDataset};
use crate::dataset::{AttackClass, Dataset};
use crate::error::{Error, Result};
use crate::featsel::FeatureSet;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CVConfig {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CVConfig {
    fn default() -> Self {
        Self {
            k: 10,
            seed: 0,
            stratified: true,
        }
    }
}

/// Fold index of every record.
///
/// Stratified: each class's records are shuffled and dealt round-robin,
/// continuing from where the previous class stopped, so per-class fold sizes
/// differ by at most one and small classes spread one per fold.
pub fn fold_assignment(classes: &[AttackClass], cfg: &CVConfig) -> Result<Vec<usize>> {
    if cfg.k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {}", cfg.k)));
    }
    if cfg.k > classes.len() {
        return Err(Error::Config(format!(
            "k = {} exceeds the {} available records",
            cfg.k,
            classes.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::substream(cfg.seed, "cv/folds"));
    let groups: Vec<Vec<usize>> = if cfg.stratified {
        AttackClass::ALL
            .into_iter()
            .map(|c| (0..classes.len()).filter(|&i| classes[i] == c).collect())
            .collect()
    } else {
        vec![(0..classes.len()).collect()]
    };
    let mut fold = vec![0; classes.len()];
    let mut next = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            fold[i] = next % cfg.k;
            next += 1;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Pooled per-class metrics; `accuracy` is the mean of fold accuracies.
    pub report: MetricsReport,
    pub folds: Vec<MetricsReport>,
    pub pooled: ConfusionMatrix,
}

/// k-fold cross-validation of `spec` restricted to `features`.
pub fn stratified_kfold(
    d: &Dataset,
    cfg: &CVConfig,
    spec: &ModelSpec,
    features: &FeatureSet,
) -> Result<CvResult> {
    spec.validate()?;
    let fold = fold_assignment(d.classes(), cfg)?;
    let folds: Vec<(MetricsReport, ConfusionMatrix)> = (0..cfg.k)
        .into_par_iter()
        .map(|f| {
            let train_rows: Vec<usize> = (0..d.len()).filter(|&i| fold[i] != f).collect();
            let test_rows: Vec<usize> = (0..d.len()).filter(|&i| fold[i] == f).collect();
            let w = WeightedDataset::subset(d, features.clone(), train_rows)?;
            let model = train(spec, &w, seed::substream(cfg.seed, &format!("cv/model/{f}")))?;
            let predicted = model.predict_rows(d, &test_rows)?;
            let actual: Vec<AttackClass> = test_rows.iter().map(|&i| d.class(i)).collect();
            let cm = confusion(&actual, &predicted)?;
            let mut report = compute_metrics(&cm);
            report.build_time = model.build_time;
            Ok((report, cm))
        })
        .collect::<Result<_>>()?;

    let mut pooled = ConfusionMatrix::empty();
    for (_, cm) in &folds {
        pooled.add(cm);
    }
    let mut report = compute_metrics(&pooled);
    report.accuracy = folds.iter().map(|f| f.0.accuracy).sum::<f64>() / folds.len() as f64;
    report.build_time = folds.iter().map(|f| f.0.build_time).sum::<std::time::Duration>()
        / folds.len() as u32;
    Ok(CvResult {
        report,
        folds: folds.into_iter().map(|f| f.0).collect(),
        pooled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use AttackClass::{Dos, Normal};

    #[test]
    fn two_folds_split_each_class() {
        let classes = [Normal, Normal, Dos, Dos];
        let f = fold_assignment(&classes, &CVConfig { k: 2, seed: 1, stratified: true }).unwrap();
        assert_ne!(f[0], f[1]);
        assert_ne!(f[2], f[3]);
    }

    #[test]
    fn too_many_folds_is_an_error() {
        let classes = [Normal; 3];
        assert!(fold_assignment(&classes, &CVConfig { k: 4, ..CVConfig::default() }).is_err());
        assert!(fold_assignment(&classes, &CVConfig { k: 1, ..CVConfig::default() }).is_err());
    }
}
