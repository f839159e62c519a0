//! The four processing stages, shared by the individual subcommands and the
//! `pipeline` driver.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use idsfeat_core::classifiers::ModelSpec;
use idsfeat_core::dataset::{
    build_class_dataset, build_pair_dataset, class_distribution, deduplicate, AttackClass,
    ClassDistribution, Dataset, DedupStats,
};
use idsfeat_core::evaluation::{stratified_kfold, CVConfig, CvResult, MetricsReport, PLOT_HEADER};
use idsfeat_core::featsel::{
    aggregate_consensus, run_all_methods, AggregateReport, FeatureSet, Grid, GridDataset,
    SearchConfig, SearchMethod,
};
use idsfeat_core::pipeline::{
    build_start_set, class_rankings, gradual_add, gradual_delete, reduce_features, select_best,
    vote_rankings, BestSelection, CvEvaluator, GuardPolicy, PhaseResult, SetEvaluator, StartSet,
    StartSetConfig,
};
use idsfeat_core::reference;
use serde::{Deserialize, Serialize};

use crate::io::OutDir;

#[derive(Debug, Clone, Serialize)]
pub struct SplitStats {
    pub source: String,
    pub dedup: DedupStats,
    pub distribution: ClassDistribution,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrepStats {
    pub train: SplitStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<SplitStats>,
}

pub struct Prepped {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub stats: PrepStats,
}

/// Deduplicates the inputs. With `out`, writes the deduplicated files, the
/// class datasets (only `only_class` when given) and `stats.json`.
pub fn prep(
    train: &Dataset,
    test: Option<&Dataset>,
    only_class: Option<AttackClass>,
    out: Option<&mut OutDir>,
) -> Result<Prepped> {
    let split = |d: &Dataset| {
        let (dd, stats) = deduplicate(d);
        let s = SplitStats {
            source: d.provenance().source.clone().unwrap_or_default(),
            distribution: class_distribution(&dd),
            dedup: stats,
        };
        (dd, s)
    };
    let (train_d, train_s) = split(train);
    let (test_d, test_s) = match test.map(split) {
        Some((d, s)) => (Some(d), Some(s)),
        None => (None, None),
    };
    let stats = PrepStats {
        train: train_s,
        test: test_s,
    };
    if let Some(out) = out {
        out.dataset("dedup.csv", &train_d)?;
        let classes: Vec<AttackClass> = match only_class {
            Some(c) => vec![c],
            None => AttackClass::ATTACKS.to_vec(),
        };
        for c in classes {
            let d = build_class_dataset(&train_d, c)?;
            out.dataset(&format!("class_{}.csv", c.name().to_ascii_lowercase()), &d)?;
        }
        if only_class.is_none() {
            out.dataset("dos_probe.csv", &build_pair_dataset(&train_d))?;
        }
        if let Some(t) = &test_d {
            out.dataset("test_dedup.csv", t)?;
        }
        out.json("stats.json", &stats)?;
    }
    Ok(Prepped {
        train: train_d,
        test: test_d,
        stats,
    })
}

/// Table-I-style summary of one split.
pub fn dedup_table(title: &str, s: &SplitStats) -> String {
    let mut t = format!(
        "{title}\n{:<8} {:>10} {:>10} {:>10} {:>8}\n",
        "class", "before", "after", "reduction", "share"
    );
    let row = |name: &str, c: &idsfeat_core::dataset::DedupCounts| {
        format!(
            "{:<8} {:>10} {:>10} {:>9.2}% {:>7.2}%\n",
            name, c.before_count, c.after_count, c.reduction_pct, c.share_of_total_pct
        )
    };
    for c in &s.dedup.classes {
        t.push_str(&row(c.class.name(), &c.counts));
    }
    t.push_str(&row("total", &s.dedup.total));
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct CellComparison {
    pub method: SearchMethod,
    pub dataset: GridDataset,
    pub jaccard: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowComparison {
    pub dataset: GridDataset,
    pub jaccard: f64,
}

/// Similarity of a computed grid to the published reference tables.
#[derive(Debug, Clone, Serialize)]
pub struct GridComparison {
    pub cells: Vec<CellComparison>,
    pub mean_cell_jaccard: f64,
    pub consensus: Vec<RowComparison>,
}

pub fn compare_grid(grid: &Grid, aggregate: &AggregateReport) -> GridComparison {
    let published = reference::table_iv_grid();
    let cells: Vec<CellComparison> = grid
        .cells
        .iter()
        .filter_map(|c| {
            let p = published.cell(c.method, c.dataset)?;
            Some(CellComparison {
                method: c.method,
                dataset: c.dataset,
                jaccard: c.features.jaccard(&p.features),
            })
        })
        .collect();
    let mean = if cells.is_empty() {
        0.0
    } else {
        cells.iter().map(|c| c.jaccard).sum::<f64>() / cells.len() as f64
    };
    let consensus = aggregate
        .classes
        .iter()
        .map(|row| RowComparison {
            dataset: row.dataset,
            jaccard: row.consensus.jaccard(&reference::table_v(row.dataset)),
        })
        .collect();
    GridComparison {
        cells,
        mean_cell_jaccard: mean,
        consensus,
    }
}

#[derive(Debug, Clone, Serialize)]
struct CellTiming {
    method: SearchMethod,
    dataset: GridDataset,
    seconds: f64,
}

/// Runs the method × dataset grid and its consensus; writes `grid.json`,
/// `grid.csv`, `aggregate.json` and `reference_comparison.json`.
pub fn search(
    data: &Dataset,
    methods: &[SearchMethod],
    rows: &[GridDataset],
    cfg: &SearchConfig,
    vote_threshold: usize,
    out: &mut OutDir,
) -> Result<(Grid, AggregateReport)> {
    let datasets = rows
        .iter()
        .map(|&g| Ok((g, g.build(data)?)))
        .collect::<Result<Vec<_>>>()?;
    let grid = run_all_methods(&datasets, methods, cfg).context("search")?;
    let aggregate = aggregate_consensus(&grid, vote_threshold);
    out.json("grid.json", &grid)?;
    out.write("grid.csv", grid.to_csv().as_bytes())?;
    out.json("aggregate.json", &aggregate)?;
    out.json("reference_comparison.json", &compare_grid(&grid, &aggregate))?;
    let timings: Vec<CellTiming> = grid
        .cells
        .iter()
        .map(|c| CellTiming {
            method: c.method,
            dataset: c.dataset,
            seconds: c.elapsed.as_secs_f64(),
        })
        .collect();
    out.sidecar("timings_search.json", &timings)?;
    Ok((grid, aggregate))
}

/// Cross-validation with fixed folds, keeping the full result per set.
pub struct CachedCv<'a> {
    data: &'a Dataset,
    spec: ModelSpec,
    cv: CVConfig,
    cache: Mutex<HashMap<FeatureSet, CvResult>>,
}

impl<'a> CachedCv<'a> {
    pub fn new(data: &'a Dataset, spec: ModelSpec, cv: CVConfig) -> Self {
        Self {
            data,
            spec,
            cv,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn run(&self, features: &FeatureSet) -> Result<CvResult> {
        Ok(self.run_core(features)?)
    }

    fn run_core(&self, features: &FeatureSet) -> idsfeat_core::Result<CvResult> {
        if let Some(r) = self.cache.lock().expect("cache lock").get(features) {
            return Ok(r.clone());
        }
        let r = stratified_kfold(self.data, &self.cv, &self.spec, features)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(features.clone(), r.clone());
        Ok(r)
    }
}

impl SetEvaluator for CachedCv<'_> {
    fn evaluate(&self, features: &FeatureSet) -> idsfeat_core::Result<MetricsReport> {
        Ok(self.run_core(features)?.report)
    }
}

#[derive(Debug, Clone, Serialize)]
struct EvalTiming {
    tag: String,
    features: usize,
    mean_fold_build_seconds: f64,
    wall_seconds: f64,
}

/// Writes `metrics_<tag>.json`, `confusion_<tag>.csv`, `plot_<tag>.csv` and
/// the `timings_<tag>.json` sidecar for one cross-validated feature set.
pub fn write_evaluation(
    tag: &str,
    features: &FeatureSet,
    result: &CvResult,
    wall: Duration,
    out: &mut OutDir,
) -> Result<()> {
    #[derive(Serialize)]
    struct Report<'a> {
        features: &'a FeatureSet,
        cv: &'a CvResult,
    }
    out.json(&format!("metrics_{tag}.json"), &Report { features, cv: result })?;
    out.write(&format!("confusion_{tag}.csv"), result.pooled.to_csv().as_bytes())?;
    let plot = format!("{PLOT_HEADER}{}", result.report.plot_rows(tag));
    out.write(&format!("plot_{tag}.csv"), plot.as_bytes())?;
    out.sidecar(
        &format!("timings_{tag}.json"),
        &EvalTiming {
            tag: tag.into(),
            features: features.len(),
            mean_fold_build_seconds: result.report.build_time.as_secs_f64(),
            wall_seconds: wall.as_secs_f64(),
        },
    )
}

pub fn evaluate(
    eval: &CachedCv,
    tag: &str,
    features: &FeatureSet,
    out: &mut OutDir,
) -> Result<CvResult> {
    let start = Instant::now();
    let r = eval.run(features).with_context(|| format!("evaluate {tag}"))?;
    write_evaluation(tag, features, &r, start.elapsed(), out)?;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Add,
    Delete,
    Both,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "add" => Ok(Strategy::Add),
            "delete" => Ok(Strategy::Delete),
            "both" => Ok(Strategy::Both),
            _ => Err(format!("unknown strategy `{s}` (expected add, delete or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub strategy: Strategy,
    pub guard: GuardPolicy,
    /// Tail length of both rankings considered for reduction.
    pub q: usize,
    pub start_set: StartSetConfig,
    /// Replaces the computed Gradually-ADD start set.
    pub start_override: Option<FeatureSet>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Both,
            guard: GuardPolicy::default(),
            q: 10,
            start_set: StartSetConfig::default(),
            start_override: None,
        }
    }
}

/// Deletion visits DOS first; addition starts with U2R.
pub const DELETE_ORDER: [AttackClass; 4] = [
    AttackClass::Dos,
    AttackClass::Probe,
    AttackClass::R2l,
    AttackClass::U2r,
];
pub const ADD_ORDER: [AttackClass; 3] = [AttackClass::U2r, AttackClass::R2l, AttackClass::Probe];

/// Guarded removal of the features ranked last both by method votes and by
/// consensus rows. Writes `trace_reduce.json`.
pub fn reduce<E: SetEvaluator>(
    data: &Dataset,
    aggregate: &AggregateReport,
    cfg: &SelectionConfig,
    eval: &E,
    out: &mut OutDir,
) -> Result<PhaseResult> {
    let all = FeatureSet::all(data.n_features());
    let (algo, class) = vote_rankings(aggregate, &all);
    let r = reduce_features(&algo, &class, &all, eval, cfg.guard, cfg.q)
        .map_err(|e| e.in_stage("reduce_features"))?;
    out.json("trace_reduce.json", &r)?;
    Ok(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalReport {
    #[serde(flatten)]
    pub selection: BestSelection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_set: Option<StartSet>,
    pub reference_set: FeatureSet,
    pub reference_jaccard: f64,
}

/// Gradually-ADD and/or Gradually-DELETE followed by arbitration on the
/// full-budget evaluator. Writes the traces, `final_set.json` and
/// `final_set.csv`.
pub fn select<L: SetEvaluator, F: SetEvaluator>(
    aggregate: &AggregateReport,
    reduced: Option<&FeatureSet>,
    cfg: &SelectionConfig,
    loop_eval: &L,
    full_eval: &F,
    out: &mut OutDir,
) -> Result<FinalReport> {
    let mut start_set = None;
    let add = if cfg.strategy != Strategy::Delete {
        let start = match &cfg.start_override {
            Some(s) => s.clone(),
            None => {
                let s = build_start_set(aggregate, &cfg.start_set);
                let f = s.features.clone();
                start_set = Some(s);
                f
            }
        };
        let class_sets: Vec<(AttackClass, FeatureSet)> = class_rankings(aggregate, &ADD_ORDER)
            .into_iter()
            .map(|(c, r)| (c, r.features().collect()))
            .collect();
        let r = gradual_add(&start, &class_sets, loop_eval, cfg.guard)
            .map_err(|e| e.in_stage("gradual_add"))?;
        out.json("trace_add.json", &r)?;
        Some(r)
    } else {
        None
    };
    let delete = if cfg.strategy != Strategy::Add {
        let start = reduced
            .cloned()
            .context("gradual_delete needs the reduced feature set")?;
        let r = gradual_delete(&start, &class_rankings(aggregate, &DELETE_ORDER), loop_eval, cfg.guard)
            .map_err(|e| e.in_stage("gradual_delete"))?;
        out.json("trace_delete.json", &r)?;
        Some(r)
    } else {
        None
    };
    let selection = select_best(add.as_ref(), delete.as_ref(), full_eval)
        .map_err(|e| e.in_stage("select_best"))?;
    let reference_set = reference::best_set();
    let report = FinalReport {
        reference_jaccard: selection.winner.jaccard(&reference_set),
        reference_set,
        start_set,
        selection,
    };
    out.json("final_set.json", &report)?;
    out.write("final_set.csv", format!("{}\n", report.selection.winner).as_bytes())?;
    Ok(report)
}

/// Loop and full-budget evaluators sharing the same folds.
pub fn evaluators<'a>(
    data: &'a Dataset,
    loop_model: &ModelSpec,
    final_model: &ModelSpec,
    cv: &CVConfig,
) -> (CvEvaluator<'a>, CachedCv<'a>) {
    (
        CvEvaluator::new(data, loop_model.clone(), cv.clone()),
        CachedCv::new(data, final_model.clone(), cv.clone()),
    )
}
