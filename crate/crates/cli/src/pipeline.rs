//! The end-to-end driver: stages 1 to 4 in order, with a manifest tying
//! every artifact to the config hash and seed.

use std::path::Path;

use anyhow::{Context, Result};
use idsfeat_core::classifiers::{train, ModelSpec, WeightedDataset};
use idsfeat_core::dataset::{AttackClass, Dataset};
use idsfeat_core::evaluation::{compute_metrics, confusion, MetricsReport, PLOT_HEADER};
use idsfeat_core::featsel::{AggregateReport, FeatureSet};
use idsfeat_core::pipeline::PhaseResult;
use idsfeat_core::seed::substream;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::io::{load_kdd, require_inputs, sha256_file, Artifact, OutDir};
use crate::stages::{self, CachedCv, Strategy};
use crate::UsageError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Input {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub stages_completed: Vec<u8>,
    pub inputs: Vec<Input>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, Serialize)]
struct ModelComparison {
    model: ModelSpec,
    accuracy: f64,
    tpr: Vec<(AttackClass, f64)>,
    report: MetricsReport,
}

#[derive(Debug, Clone, Serialize)]
struct ClassifierSelection {
    features: FeatureSet,
    models: Vec<ModelComparison>,
    best: usize,
    final_model_is_best: bool,
}

#[derive(Debug, Clone, Serialize)]
struct FinalComparison {
    best: FeatureSet,
    all: FeatureSet,
    accuracy_best: f64,
    accuracy_all: f64,
    tpr_best: Vec<(AttackClass, f64)>,
    tpr_all: Vec<(AttackClass, f64)>,
}

fn tprs(r: &MetricsReport) -> Vec<(AttackClass, f64)> {
    r.supported_classes().into_iter().map(|c| (c, r.tpr(c))).collect()
}

/// Trains on `train` and scores `test`.
fn holdout(
    train_d: &Dataset,
    test_d: &Dataset,
    spec: &ModelSpec,
    features: &FeatureSet,
    seed: u64,
) -> Result<(MetricsReport, idsfeat_core::evaluation::ConfusionMatrix)> {
    let w = WeightedDataset::uniform(train_d, features.clone())?;
    let model = train(spec, &w, seed)?;
    let predicted = model.predict_dataset(test_d)?;
    let cm = confusion(test_d.classes(), &predicted)?;
    let mut report = compute_metrics(&cm);
    report.build_time = model.build_time;
    Ok((report, cm))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, needed_by: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|_| {
        UsageError(format!(
            "{needed_by} needs {} from an earlier run of stage 3",
            path.display()
        ))
    })?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Records a completed stage and rewrites the manifest, so a later failure
/// leaves a manifest describing the artifacts already on disk.
fn finish_stage(manifest: &mut Manifest, out: &mut OutDir, stage: u8) -> Result<()> {
    manifest.stages_completed.push(stage);
    manifest.artifacts = out.artifacts().to_vec();
    out.sidecar("manifest.json", manifest)
}

pub fn run(cfg: &PipelineConfig) -> Result<Manifest> {
    cfg.validate()?;
    let inputs: Vec<&Path> = std::iter::once(cfg.train.as_path())
        .chain(cfg.test.as_deref())
        .collect();
    require_inputs(inputs.iter().copied())?;
    let mut out = OutDir::create(&cfg.out)?;
    out.write("config.canonical.json", cfg.canonical()?.as_bytes())?;

    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        stages_completed: Vec::new(),
        inputs: Vec::new(),
        artifacts: Vec::new(),
    };
    for (role, p) in ["train", "test"].into_iter().zip(inputs.iter()) {
        manifest.inputs.push(Input {
            role: role.into(),
            path: p.display().to_string(),
            sha256: sha256_file(p)?,
        });
    }

    let train_raw = load_kdd(&cfg.train).map_err(|e| e.context("stage 1"))?;
    let test_raw = cfg.test.as_deref().map(load_kdd).transpose()?;
    let prepped = if cfg.runs(1) {
        eprintln!("stage 1: preprocessing");
        let p = stages::prep(&train_raw, test_raw.as_ref(), None, Some(&mut out))
            .context("stage 1")?;
        eprint!("{}", stages::dedup_table("train", &p.stats.train));
        if let Some(t) = &p.stats.test {
            eprint!("{}", stages::dedup_table("test", t));
        }
        finish_stage(&mut manifest, &mut out, 1)?;
        p
    } else {
        stages::prep(&train_raw, test_raw.as_ref(), None, None)?
    };
    drop((train_raw, test_raw));
    let data = &prepped.train;
    let all = FeatureSet::all(data.n_features());
    let cv = cfg.cv.cv_config(cfg.seed);

    if cfg.runs(2) {
        eprintln!("stage 2: classifier comparison");
        let mut models = Vec::new();
        for spec in &cfg.models.compare {
            let r = CachedCv::new(data, spec.clone(), cv.clone())
                .run(&all)
                .context("stage 2")?
                .report;
            models.push(ModelComparison {
                model: spec.clone(),
                accuracy: r.accuracy,
                tpr: tprs(&r),
                report: r,
            });
        }
        let best = (0..models.len())
            .rev()
            .max_by(|&a, &b| models[a].accuracy.total_cmp(&models[b].accuracy))
            .unwrap_or(0);
        let selection = ClassifierSelection {
            features: all.clone(),
            final_model_is_best: models
                .get(best)
                .is_some_and(|m| m.model == cfg.models.final_model),
            best,
            models,
        };
        out.json("classifiers.json", &selection)?;
        finish_stage(&mut manifest, &mut out, 2)?;
    }

    let (loop_eval, full_eval) =
        stages::evaluators(data, &cfg.models.loop_model, &cfg.models.final_model, &cv);
    let mut stage3: Option<(AggregateReport, Option<PhaseResult>)> = None;
    if cfg.runs(3) {
        eprintln!("stage 3: search and reduction");
        let search_cfg = cfg.search.search_config(cfg.seed);
        let (_, aggregate) = stages::search(
            data,
            &cfg.search.methods,
            &cfg.search.rows,
            &search_cfg,
            cfg.search.vote_threshold,
            &mut out,
        )
        .context("stage 3")?;
        let reduced = if cfg.selection.strategy != Strategy::Add {
            Some(stages::reduce(data, &aggregate, &cfg.selection, &loop_eval, &mut out).context("stage 3")?)
        } else {
            None
        };
        stage3 = Some((aggregate, reduced));
        finish_stage(&mut manifest, &mut out, 3)?;
    }

    if cfg.runs(4) {
        eprintln!("stage 4: selection");
        let (aggregate, reduced) = match stage3 {
            Some(s) => s,
            None => {
                let aggregate: AggregateReport = read_json(&out.path("aggregate.json"), "stage 4")?;
                let reduced = if cfg.selection.strategy != Strategy::Add {
                    Some(read_json::<PhaseResult>(&out.path("trace_reduce.json"), "stage 4")?)
                } else {
                    None
                };
                (aggregate, reduced)
            }
        };
        let report = stages::select(
            &aggregate,
            reduced.as_ref().map(|r| &r.set),
            &cfg.selection,
            &loop_eval,
            &full_eval,
            &mut out,
        )
        .context("stage 4")?;
        let best = report.selection.winner.clone();
        let rb = stages::evaluate(&full_eval, "best", &best, &mut out).context("stage 4")?;
        let ra = stages::evaluate(&full_eval, "all", &all, &mut out).context("stage 4")?;
        out.json(
            "comparison.json",
            &FinalComparison {
                best: best.clone(),
                all: all.clone(),
                accuracy_best: rb.report.accuracy,
                accuracy_all: ra.report.accuracy,
                tpr_best: tprs(&rb.report),
                tpr_all: tprs(&ra.report),
            },
        )?;
        if let Some(test) = &prepped.test {
            let seed = substream(cfg.seed, "holdout");
            for (tag, set) in [("best", &best), ("all", &all)] {
                let (r, cm) = holdout(data, test, &cfg.models.final_model, set, seed)
                    .context("stage 4 test-set evaluation")?;
                out.json(&format!("test_metrics_{tag}.json"), &r)?;
                out.write(&format!("test_confusion_{tag}.csv"), cm.to_csv().as_bytes())?;
                let plot = format!("{PLOT_HEADER}{}", r.plot_rows(&format!("test_{tag}")));
                out.write(&format!("test_plot_{tag}.csv"), plot.as_bytes())?;
            }
        }
        finish_stage(&mut manifest, &mut out, 4)?;
    }
    Ok(manifest)
}
