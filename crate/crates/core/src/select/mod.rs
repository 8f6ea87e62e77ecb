//! Wrapper feature selection: SFFS, Boruta and a genetic algorithm, scored by
//! stratified cross-validated AUC.

mod boruta;
mod design;
mod genetic;
mod sffs;

pub use boruta::boruta;
pub use design::{cv_score, stratified_folds, CvPlan, Design};
pub use genetic::{genetic_fitness, genetic_select};
pub use sffs::sffs;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureRegistry};
use crate::learners::{ModelKind, ModelSpec};

pub const SELECTION_FILE: &str = "selection.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sffs,
    Boruta,
    Genetic,
    /// Every usable feature; the no-selection baseline.
    None,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sffs, Method::Boruta, Method::Genetic, Method::None];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sffs => "sffs",
            Method::Boruta => "boruta",
            Method::Genetic => "genetic",
            Method::None => "none",
        }
    }

    /// Column heading in results tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Method::Sffs => "SFFS",
            Method::Boruta => "Boruta",
            Method::Genetic => "GA",
            Method::None => "All",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_lowercase();
        let s = if s == "ga" { "genetic".to_string() } else { s };
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown selector {s:?}; valid selectors: sffs, boruta, genetic, none"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub method: Method,
    /// Model used inside the wrapper; `None` means the downstream model, or
    /// default GB when selecting standalone.
    pub scorer_model: Option<ModelSpec>,
    pub cv_folds: usize,
    pub max_features: usize,
    pub seed: u64,
    /// Smallest CV gain that lets SFFS add a feature.
    pub epsilon_gain: f64,
    /// Keep only this many univariately strongest features as candidates;
    /// 0 keeps all.
    pub candidate_pool: usize,
    pub boruta_max_iter: usize,
    pub boruta_alpha: f64,
    pub boruta_trees: usize,
    pub ga_population: usize,
    pub ga_generations: usize,
    pub ga_tournament: usize,
    /// Per-bit probability of taking the first parent's bit.
    pub ga_crossover: f64,
    /// Per-bit flip probability; 0 means 1/d.
    pub ga_mutation: f64,
    pub ga_elitism: usize,
    /// Fitness penalty per selected feature.
    pub ga_penalty: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            method: Method::Sffs,
            scorer_model: None,
            cv_folds: 5,
            max_features: 25,
            seed: 0,
            epsilon_gain: 1e-4,
            candidate_pool: 40,
            boruta_max_iter: 100,
            boruta_alpha: 0.05,
            boruta_trees: 100,
            ga_population: 50,
            ga_generations: 40,
            ga_tournament: 3,
            ga_crossover: 0.5,
            ga_mutation: 0.0,
            ga_elitism: 2,
            ga_penalty: 0.0005,
        }
    }
}

impl SelectionConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn scorer(&self) -> ModelSpec {
        self.scorer_model
            .clone()
            .unwrap_or_else(|| ModelSpec::new(ModelKind::Gb))
    }

    pub fn validate(&self, feature_count: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("selection: {m}")));
        if let Some(s) = &self.scorer_model {
            s.validate()?;
        }
        if self.cv_folds < 2 {
            return bad("cv_folds must be at least 2");
        }
        if self.max_features == 0 {
            return bad("max_features must be positive");
        }
        if self.max_features > feature_count {
            return bad(&format!(
                "max_features {} exceeds the {feature_count} available features",
                self.max_features
            ));
        }
        if !(self.epsilon_gain >= 0.0) {
            return bad("epsilon_gain must be non-negative");
        }
        if !(self.boruta_alpha > 0.0 && self.boruta_alpha < 1.0) {
            return bad("boruta_alpha must lie in (0, 1)");
        }
        if self.boruta_max_iter == 0 || self.boruta_trees == 0 {
            return bad("boruta_max_iter and boruta_trees must be positive");
        }
        if self.ga_population < 2 || self.ga_tournament == 0 || self.ga_elitism > self.ga_population {
            return bad("GA needs population >= 2, tournament >= 1 and elitism <= population");
        }
        if !(0.0..=1.0).contains(&self.ga_crossover) || !(0.0..=1.0).contains(&self.ga_mutation) {
            return bad("GA rates must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Selected,
    Rejected,
    Tentative,
    Unvisited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub size: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    /// In selection order (SFFS), importance order (Boruta), or ascending id.
    pub selected: Vec<FeatureId>,
    pub score_trace: Vec<TraceStep>,
    pub decisions: BTreeMap<FeatureId, Decision>,
    /// Largest shadow importance per Boruta iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shadow_max: Vec<f64>,
}

impl SelectionResult {
    pub(crate) fn from_columns(
        method: Method,
        design: &Design,
        selected: &[usize],
        visited: &[usize],
        score_trace: Vec<TraceStep>,
    ) -> Self {
        let mut decisions: BTreeMap<FeatureId, Decision> =
            design.ids.iter().map(|&id| (id, Decision::Unvisited)).collect();
        for &j in visited {
            decisions.insert(design.ids[j], Decision::Rejected);
        }
        for &j in selected {
            decisions.insert(design.ids[j], Decision::Selected);
        }
        Self {
            method,
            selected: selected.iter().map(|&j| design.ids[j]).collect(),
            score_trace,
            decisions,
            shadow_max: Vec::new(),
        }
    }

    /// Column positions of the selected features within `design`.
    pub fn columns_in(&self, design: &Design) -> Vec<usize> {
        self.selected
            .iter()
            .filter_map(|id| design.ids.iter().position(|d| d == id))
            .collect()
    }

    pub fn best_score(&self) -> Option<f64> {
        self.score_trace.iter().map(|t| t.score).reduce(f64::max)
    }
}

/// Runs the configured selector.
pub fn select(design: &Design, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate(design.width())?;
    match config.method {
        Method::Sffs => sffs(design, config),
        Method::Boruta => boruta(design, config),
        Method::Genetic => genetic_select(design, config),
        Method::None => {
            let usable = design.prescreen(&design.usable_columns(), 0);
            Ok(SelectionResult::from_columns(Method::None, design, &usable, &usable, Vec::new()))
        }
    }
}

#[derive(Serialize)]
struct SelectionFile<'a> {
    method: Method,
    config: &'a SelectionConfig,
    selected: Vec<SelectedFeature>,
    decisions: &'a BTreeMap<FeatureId, Decision>,
    score_trace: &'a [TraceStep],
    #[serde(skip_serializing_if = "<[f64]>::is_empty")]
    shadow_max: &'a [f64],
}

#[derive(Serialize)]
struct SelectedFeature {
    id: FeatureId,
    name: String,
}

pub fn write_selection_json(
    path: &Path,
    config: &SelectionConfig,
    result: &SelectionResult,
) -> Result<()> {
    let reg = FeatureRegistry::global();
    let file = SelectionFile {
        method: result.method,
        config,
        selected: result
            .selected
            .iter()
            .map(|&id| SelectedFeature {
                id,
                name: reg.name(id).to_string(),
            })
            .collect(),
        decisions: &result.decisions,
        score_trace: &result.score_trace,
        shadow_max: &result.shadow_max,
    };
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
