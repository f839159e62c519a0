//! `idsfeat`: deduplication, subset search, guarded feature selection and
//! cross-validated evaluation of KDD'99 connection records.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.

mod config;
mod io;
mod pipeline;
mod stages;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use idsfeat_core::classifiers::{ForestConfig, ModelSpec, TreeConfig};
use idsfeat_core::dataset::{AttackClass, Dataset};
use idsfeat_core::evaluation::CVConfig;
use idsfeat_core::featsel::{AggregateReport, FeatureSet, GridDataset, SearchConfig, SearchMethod};
use idsfeat_core::pipeline::GuardPolicy;
use idsfeat_core::seed::substream;

use crate::config::PipelineConfig;
use crate::io::{load_kdd, require_inputs, OutDir};
use crate::stages::{SelectionConfig, Strategy};

/// A problem with the invocation or configuration rather than the run.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "idsfeat", version, about = "Relevant-feature selection for KDD'99 intrusion detection")]
struct Cli {
    /// Output directory (default: idsfeat-out)
    #[arg(long, global = true, env = "IDSFEAT_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deduplicate, split into class datasets and report counts
    Prep {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        /// Only write the dataset of this attack class plus NORMAL
        #[arg(long, value_parser = parse_attack_class)]
        class: Option<AttackClass>,
    },
    /// Run the subset searches and the consensus aggregation
    Search {
        /// KDD CSV (default: <out>/dedup.csv)
        #[arg(long)]
        data: Option<PathBuf>,
        /// `all` or a comma separated list of methods
        #[arg(long, default_value = "all", value_parser = parse_methods)]
        methods: MethodList,
        /// Comma separated dataset rows: All, DOS, PROBE, R2L, U2R
        #[arg(long, value_parser = parse_rows)]
        dataset: Option<RowList>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Minimum number of methods for a feature to enter a consensus row
        #[arg(long, default_value_t = 4)]
        threshold: usize,
    },
    /// Guarded reduction, Gradually-ADD / Gradually-DELETE and arbitration
    Select {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Consensus report from `search` (default: <out>/aggregate.json)
        #[arg(long)]
        aggregate: Option<PathBuf>,
        #[arg(long, default_value = "both")]
        strategy: Strategy,
        /// Explicit Gradually-ADD start set, e.g. 5,29,39
        #[arg(long, value_parser = parse_features)]
        start_set: Option<FeatureSet>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = GuardPolicy::default().epsilon)]
        epsilon: f64,
        #[arg(long, default_value_t = 10)]
        q: usize,
        #[arg(long = "cv", default_value_t = 10)]
        folds: usize,
        /// Model inside the selection loops
        #[arg(long, default_value = "budgeted", value_parser = parse_model)]
        loop_model: ModelSpec,
        /// Model for the final arbitration
        #[arg(long, default_value = "default", value_parser = parse_model)]
        model: ModelSpec,
    },
    /// Cross-validate one feature set
    Evaluate {
        #[arg(long)]
        data: Option<PathBuf>,
        /// `all` or a comma separated list of feature indices
        #[arg(long, value_parser = parse_features)]
        features: FeatureSet,
        #[arg(long = "cv", default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// default, budgeted, nb, tree, forest, or a JSON model spec
        #[arg(long, default_value = "default", value_parser = parse_model)]
        model: ModelSpec,
        /// Name used in output file names (default: `all` or `selected`)
        #[arg(long)]
        tag: Option<String>,
    },
    /// Run the configured stages end to end
    Pipeline { config: PathBuf },
}

#[derive(Debug, Clone)]
struct MethodList(Vec<SearchMethod>);

#[derive(Debug, Clone)]
struct RowList(Vec<GridDataset>);

fn parse_methods(s: &str) -> Result<MethodList, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(MethodList(SearchMethod::ALL.to_vec()));
    }
    let mut v: Vec<SearchMethod> = s
        .split(',')
        .map(|t| t.parse().map_err(|e: idsfeat_core::Error| e.to_string()))
        .collect::<Result<_, _>>()?;
    v.sort();
    v.dedup();
    Ok(MethodList(v))
}

fn parse_rows(s: &str) -> Result<RowList, String> {
    let mut v: Vec<GridDataset> = s
        .split(',')
        .map(|t| t.parse().map_err(|e: idsfeat_core::Error| e.to_string()))
        .collect::<Result<_, _>>()?;
    v.sort();
    v.dedup();
    Ok(RowList(v))
}

fn parse_features(s: &str) -> Result<FeatureSet, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(FeatureSet::all(idsfeat_core::dataset::KDD_FEATURE_COUNT));
    }
    let f: FeatureSet = s.parse().map_err(|e: idsfeat_core::Error| e.to_string())?;
    if f.is_empty() {
        return Err("feature list is empty".into());
    }
    Ok(f)
}

fn parse_attack_class(s: &str) -> Result<AttackClass, String> {
    match s.parse::<AttackClass>() {
        Ok(AttackClass::Normal) => Err("NORMAL is not an attack class".into()),
        Ok(c) => Ok(c),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_model(s: &str) -> Result<ModelSpec, String> {
    let spec = match s {
        "default" => ModelSpec::default(),
        "budgeted" => ModelSpec::budgeted(),
        "nb" | "naive_bayes" => ModelSpec::NaiveBayes,
        "tree" => ModelSpec::Tree(TreeConfig::default()),
        "forest" => ModelSpec::Forest(ForestConfig::default()),
        json if json.trim_start().starts_with('{') => {
            serde_json::from_str(json).map_err(|e| format!("bad model spec: {e}"))?
        }
        other => {
            return Err(format!(
                "unknown model `{other}` (expected default, budgeted, nb, tree, forest or a JSON spec)"
            ))
        }
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn out_dir(cli_out: &Option<PathBuf>) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from("idsfeat-out"))
}

/// Loads and deduplicates an input (a no-op on already deduplicated files).
fn load_dedup(path: &Path) -> Result<Dataset> {
    let d = load_kdd(path)?;
    Ok(idsfeat_core::dataset::deduplicate(&d).0)
}

fn cv_config(folds: usize, seed: u64) -> Result<CVConfig> {
    if folds < 2 {
        return Err(UsageError(format!("--cv must be at least 2, got {folds}")).into());
    }
    Ok(CVConfig {
        k: folds,
        seed: substream(seed, "cv"),
        stratified: true,
    })
}

fn run(cli: Cli) -> Result<()> {
    let out_path = out_dir(&cli.out);
    match cli.command {
        Command::Prep { train, test, class } => {
            require_inputs(std::iter::once(train.as_path()).chain(test.as_deref()))?;
            let train_d = load_kdd(&train)?;
            let test_d = test.as_deref().map(load_kdd).transpose()?;
            let mut out = OutDir::create(&out_path)?;
            let p = stages::prep(&train_d, test_d.as_ref(), class, Some(&mut out))?;
            print!("{}", stages::dedup_table("train", &p.stats.train));
            if let Some(t) = &p.stats.test {
                print!("{}", stages::dedup_table("test", t));
            }
        }
        Command::Search {
            data,
            methods,
            dataset,
            seed,
            threshold,
        } => {
            let data = data.unwrap_or_else(|| out_path.join("dedup.csv"));
            require_inputs([data.as_path()])?;
            let d = load_dedup(&data)?;
            let rows = dataset.map(|r| r.0).unwrap_or_else(|| GridDataset::ALL.to_vec());
            let mut out = OutDir::create(&out_path)?;
            let cfg = SearchConfig {
                seed: substream(seed, "search"),
                ..SearchConfig::default()
            };
            let (grid, _) = stages::search(&d, &methods.0, &rows, &cfg, threshold, &mut out)?;
            print!("{}", grid.to_csv());
        }
        Command::Select {
            data,
            aggregate,
            strategy,
            start_set,
            seed,
            epsilon,
            q,
            folds,
            loop_model,
            model,
        } => {
            if epsilon.is_nan() || epsilon < 0.0 {
                return Err(UsageError("--epsilon must be non-negative".into()).into());
            }
            let data = data.unwrap_or_else(|| out_path.join("dedup.csv"));
            let aggregate = aggregate.unwrap_or_else(|| out_path.join("aggregate.json"));
            require_inputs([data.as_path(), aggregate.as_path()])?;
            let cv = cv_config(folds, seed)?;
            let report: AggregateReport = serde_json::from_str(
                &std::fs::read_to_string(&aggregate)
                    .with_context(|| format!("reading {}", aggregate.display()))?,
            )
            .with_context(|| format!("parsing {}", aggregate.display()))?;
            let d = load_dedup(&data)?;
            let cfg = SelectionConfig {
                strategy,
                guard: GuardPolicy { epsilon },
                q,
                start_override: start_set,
                ..SelectionConfig::default()
            };
            let mut out = OutDir::create(&out_path)?;
            let (loop_eval, full_eval) = stages::evaluators(&d, &loop_model, &model, &cv);
            let reduced = if strategy != Strategy::Add {
                Some(stages::reduce(&d, &report, &cfg, &loop_eval, &mut out)?.set)
            } else {
                None
            };
            let r = stages::select(&report, reduced.as_ref(), &cfg, &loop_eval, &full_eval, &mut out)?;
            if let Some(w) = &r.selection.warning {
                eprintln!("warning: {w}");
            }
            println!(
                "winner ({}): {}  jaccard vs reference set: {:.3}",
                r.selection.winner_phase, r.selection.winner, r.reference_jaccard
            );
        }
        Command::Evaluate {
            data,
            features,
            folds,
            seed,
            model,
            tag,
        } => {
            let data = data.unwrap_or_else(|| out_path.join("dedup.csv"));
            require_inputs([data.as_path()])?;
            let cv = cv_config(folds, seed)?;
            let d = load_dedup(&data)?;
            if let Some(f) = features.iter().find(|&f| !d.schema().contains(f)) {
                return Err(UsageError(format!("feature {f} is not in the dataset schema")).into());
            }
            let tag = tag.unwrap_or_else(|| {
                if features.len() == d.n_features() { "all" } else { "selected" }.to_string()
            });
            let mut out = OutDir::create(&out_path)?;
            let start = Instant::now();
            let eval = stages::CachedCv::new(&d, model, cv);
            let r = stages::evaluate(&eval, &tag, &features, &mut out)?;
            println!(
                "{tag}: {} features, accuracy {:.6}, mean fold build {:.3}s, total {:.1}s",
                features.len(),
                r.report.accuracy,
                r.report.build_time.as_secs_f64(),
                start.elapsed().as_secs_f64()
            );
        }
        Command::Pipeline { config } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(o) = &cli.out {
                cfg.out = o.clone();
            }
            let m = pipeline::run(&cfg)?;
            println!(
                "config {}  stages {:?}  {} artifacts in {}",
                m.config_hash,
                m.stages_completed,
                m.artifacts.len(),
                cfg.out.display()
            );
        }
    }
    Ok(())
}

/// 2 for usage and configuration problems, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    let mut core = err.downcast_ref::<idsfeat_core::Error>();
    while let Some(idsfeat_core::Error::Stage { source, .. }) = core {
        core = Some(source);
    }
    match core {
        Some(
            idsfeat_core::Error::Config(_)
            | idsfeat_core::Error::InvalidFeature(_)
            | idsfeat_core::Error::FeatureNotInSchema(_)
            | idsfeat_core::Error::InvalidClassFilter(_)
            | idsfeat_core::Error::EmptyFeatureSet,
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("all").unwrap().0.len(), 7);
        assert_eq!(parse_methods("greedy,tabu,greedy").unwrap().0.len(), 2);
        let err = parse_methods("simulated_annealing").unwrap_err();
        assert!(err.contains("best_first") && err.contains("pso"));
    }

    #[test]
    fn feature_lists() {
        assert_eq!(parse_features("all").unwrap().len(), 41);
        assert_eq!(parse_features("5,29,39").unwrap().indices(), vec![5, 29, 39]);
        assert!(parse_features("0,3").is_err());
        assert!(parse_features("42").is_err());
    }

    #[test]
    fn config_errors_exit_two() {
        let e: anyhow::Error = idsfeat_core::Error::Config("x".into()).in_stage("s").into();
        assert_eq!(exit_code(&e), 2);
        let e: anyhow::Error = idsfeat_core::Error::EmptyTrainingSet.into();
        assert_eq!(exit_code(&e.context("stage 3")), 1);
        let e: anyhow::Error = UsageError("missing".into()).into();
        assert_eq!(exit_code(&e), 2);
    }
}
