//! Versioned pipeline configuration.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use idsfeat_core::classifiers::{ForestConfig, ModelSpec, TreeConfig};
use idsfeat_core::evaluation::CVConfig;
use idsfeat_core::featsel::{
    BestFirstParams, GeneticParams, GridDataset, PsoParams, SearchConfig, SearchMethod,
    TabuParams,
};
use idsfeat_core::seed::substream;
use serde::{Deserialize, Serialize};

use crate::io::sha256_bytes;
use crate::stages::SelectionConfig;
use crate::UsageError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub train: PathBuf,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Stages to run: 1 preprocessing, 2 classifier comparison, 3 search and
    /// reduction, 4 selection and final evaluation.
    #[serde(default = "all_stages")]
    pub stages: Vec<u8>,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub models: ModelSettings,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub cv: CvSettings,
}

fn default_out() -> PathBuf {
    PathBuf::from("idsfeat-out")
}

fn default_seed() -> u64 {
    42
}

fn all_stages() -> Vec<u8> {
    vec![1, 2, 3, 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub methods: Vec<SearchMethod>,
    pub rows: Vec<GridDataset>,
    pub vote_threshold: usize,
    pub best_first: BestFirstParams,
    pub tabu: TabuParams,
    pub pso: PsoParams,
    pub genetic: GeneticParams,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let s = SearchConfig::default();
        Self {
            methods: SearchMethod::ALL.to_vec(),
            rows: GridDataset::ALL.to_vec(),
            vote_threshold: 4,
            best_first: s.best_first,
            tabu: s.tabu,
            pso: s.pso,
            genetic: s.genetic,
        }
    }
}

impl SearchSettings {
    pub fn search_config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            seed: substream(seed, "search"),
            best_first: self.best_first.clone(),
            tabu: self.tabu.clone(),
            pso: self.pso.clone(),
            genetic: self.genetic.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    /// Model for arbitration and the final comparison.
    pub final_model: ModelSpec,
    /// Cheaper model used inside the selection loops.
    pub loop_model: ModelSpec,
    /// Learners compared in stage 2.
    pub compare: Vec<ModelSpec>,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            final_model: ModelSpec::default(),
            loop_model: ModelSpec::budgeted(),
            compare: vec![
                ModelSpec::NaiveBayes,
                ModelSpec::Tree(TreeConfig::default()),
                ModelSpec::Forest(ForestConfig::default()),
                ModelSpec::default(),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub k: usize,
    pub stratified: bool,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            k: 10,
            stratified: true,
        }
    }
}

impl CvSettings {
    pub fn cv_config(&self, seed: u64) -> CVConfig {
        CVConfig {
            k: self.k,
            seed: substream(seed, "cv"),
            stratified: self.stratified,
        }
    }
}

impl PipelineConfig {
    /// Reads and validates a config file. Relative input and output paths
    /// are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.train = base.join(&cfg.train);
        cfg.test = cfg.test.map(|t| base.join(t));
        cfg.out = base.join(&cfg.out);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| -> Result<()> { Err(UsageError(m).into()) };
        if self.version != CONFIG_VERSION {
            return usage(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        if let Some(s) = self.stages.iter().find(|s| !(1..=4).contains(*s)) {
            return usage(format!("unknown stage {s}; stages are 1 to 4"));
        }
        if self.cv.k < 2 {
            return usage(format!("cv.k must be at least 2, got {}", self.cv.k));
        }
        if self.search.methods.is_empty() || self.search.rows.is_empty() {
            return usage("search needs at least one method and one dataset row".into());
        }
        if self.selection.guard.epsilon.is_nan() || self.selection.guard.epsilon < 0.0 {
            return usage("guard epsilon must be non-negative".into());
        }
        for m in [&self.models.final_model, &self.models.loop_model]
            .into_iter()
            .chain(&self.models.compare)
        {
            m.validate().map_err(|e| UsageError(e.to_string()))?;
        }
        Ok(())
    }

    pub fn runs(&self, stage: u8) -> bool {
        self.stages.contains(&stage)
    }

    /// Compact JSON with every default filled in.
    pub fn canonical(&self) -> Result<String> {
        serde_json::to_string(self).context("serializing config")
    }

    /// SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_bytes(self.canonical()?.as_bytes()))
    }
}
