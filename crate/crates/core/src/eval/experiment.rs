use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, roc_curve, RocPoint};
use super::splits::{make_loocv_splits, SplitPlan};
use crate::error::{Error, Result};
use crate::features::{CohortMatrix, Dataset, FeatureId, FeatureRegistry, FEATURE_COUNT};
use crate::learners::{self, ModelKind, ModelSpec, TrainedModel};
use crate::rng;
use crate::select::{self, Design, Method, SelectionConfig, SelectionResult};

/// Feature block an experiment may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Ds4,
    Ds6,
    Ds7,
    Ds8,
    Ds9,
    Combined,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Ds4,
        Scenario::Ds6,
        Scenario::Ds7,
        Scenario::Ds8,
        Scenario::Ds9,
        Scenario::Combined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Ds4 => "ds4",
            Scenario::Ds6 => "ds6",
            Scenario::Ds7 => "ds7",
            Scenario::Ds8 => "ds8",
            Scenario::Ds9 => "ds9",
            Scenario::Combined => "combined",
        }
    }

    pub fn dataset(self) -> Option<Dataset> {
        match self {
            Scenario::Ds4 => Some(Dataset::Ds4),
            Scenario::Ds6 => Some(Dataset::Ds6),
            Scenario::Ds7 => Some(Dataset::Ds7),
            Scenario::Ds8 => Some(Dataset::Ds8),
            Scenario::Ds9 => Some(Dataset::Ds9),
            Scenario::Combined => None,
        }
    }

    pub fn feature_ids(self) -> Vec<FeatureId> {
        match self.dataset() {
            Some(ds) => FeatureRegistry::global().dataset_ids(ds),
            None => (0..FEATURE_COUNT).map(FeatureId::from_index).collect(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_lowercase();
        Scenario::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario {s:?}; valid scenarios: ds4, ds6, ds7, ds8, ds9, combined"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Selection refitted on every training split.
    PerSplit,
    /// Selection run once per seed on the whole cohort. Leaks test subjects
    /// into the selector; offered for reproduction studies only.
    LeakyGlobal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub selection: SelectionConfig,
    pub model: ModelSpec,
    pub seeds: Vec<u64>,
    pub leaky_selection: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Combined,
            selection: SelectionConfig::default(),
            model: ModelSpec::new(ModelKind::Gb),
            seeds: (0..5).collect(),
            leaky_selection: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let width = self.scenario.feature_ids().len();
        self.selection_for(0, width).validate(width)?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".to_string()));
        }
        Ok(())
    }

    pub fn mode(&self) -> SelectionMode {
        if self.leaky_selection {
            SelectionMode::LeakyGlobal
        } else {
            SelectionMode::PerSplit
        }
    }

    /// Selection settings for one fit on `width` features: the scorer
    /// defaults to the downstream model and the cap shrinks to the width.
    fn selection_for(&self, seed: u64, width: usize) -> SelectionConfig {
        let mut c = self.selection.clone();
        c.seed = seed;
        if c.scorer_model.is_none() {
            c.scorer_model = Some(self.model.clone());
        }
        c.max_features = c.max_features.min(width);
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario: Scenario,
    pub selector: Method,
    pub model: ModelKind,
    pub selection_mode: SelectionMode,
    pub seeds: Vec<u64>,
    pub per_run_auc: Vec<f64>,
    pub mean_auc: f64,
    /// Curve of the run-averaged subject scores.
    pub roc: Vec<RocPoint>,
    /// Subject id to mean test probability over runs.
    pub per_subject_scores: BTreeMap<String, f64>,
    /// How many (run, split) fits selected each feature.
    pub selection_counts: BTreeMap<FeatureId, usize>,
    pub fits: usize,
    pub config: ExperimentConfig,
}

impl EvalReport {
    /// The `k` most frequently selected features, ties to the lower id.
    pub fn top_features(&self, k: usize) -> Vec<(FeatureId, usize)> {
        let mut v: Vec<(FeatureId, usize)> =
            self.selection_counts.iter().map(|(&id, &c)| (id, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }
}

/// Selection plus model fitted on one training set.
pub struct SplitFit {
    pub selection: SelectionResult,
    pub model: TrainedModel,
    /// Design columns fed to the model, in feature-id order.
    pub columns: Vec<usize>,
}

impl SplitFit {
    pub fn predict(&self, design: &Design, row: usize) -> f64 {
        let x: Vec<f64> = self.columns.iter().map(|&j| design.x[row][j]).collect();
        self.model.predict_proba(&x)
    }

    /// Digest of everything fitted: the selected ids and the preprocessor.
    pub fn fingerprint(&self) -> u64 {
        let ids: Vec<u64> = self.selection.selected.iter().map(|id| id.get() as u64).collect();
        rng::derive_seed(self.model.preprocessor.fingerprint(), &ids)
    }
}

fn context(e: Error, run: u64, k: usize, plan: &SplitPlan, ids: &[String]) -> Error {
    let [p, n] = plan.test(k);
    Error::Domain(format!(
        "seed {run}, split {k} (test subjects {}, {}): {e}",
        ids[p], ids[n]
    ))
}

/// Fits selection (unless `global` is given) and the model on `train` rows.
pub fn fit_split(
    design: &Design,
    train: &[usize],
    config: &ExperimentConfig,
    global: Option<&SelectionResult>,
    seed: u64,
) -> Result<SplitFit> {
    let sub = design.rows(train);
    let selection = match global {
        Some(g) => g.clone(),
        None => select::select(&sub, &config.selection_for(seed, design.width()))?,
    };
    let mut columns = selection.columns_in(design);
    columns.sort_by_key(|&j| design.ids[j]);
    let x = design.project(train, &columns);
    let spec = config
        .model
        .clone()
        .with_seed(rng::derive_seed(seed, &[0x6d6f64]));
    let model = learners::fit(&spec, &x, &sub.y)?;
    Ok(SplitFit {
        selection,
        model,
        columns,
    })
}

fn global_selection(design: &Design, config: &ExperimentConfig, run: u64) -> Result<Option<SelectionResult>> {
    if !config.leaky_selection {
        return Ok(None);
    }
    let seed = rng::derive_seed(run, &[0x676c6f]);
    select::select(design, &config.selection_for(seed, design.width())).map(Some)
}

/// Fingerprint of what split `k` of seed `run` fits, exactly as
/// [`run_experiment`] would fit it on `design`.
pub fn split_fingerprint(
    design: &Design,
    plan: &SplitPlan,
    k: usize,
    config: &ExperimentConfig,
    run: u64,
) -> Result<u64> {
    let global = global_selection(design, config, run)?;
    let fit = fit_split(
        design,
        &plan.train(k),
        config,
        global.as_ref(),
        rng::derive_seed(run, &[k as u64]),
    )?;
    Ok(fit.fingerprint())
}

/// Checks that erasing split `k`'s test rows leaves the fitted selection and
/// preprocessing unchanged. Returns the two fingerprints.
pub fn leakage_audit(
    design: &Design,
    plan: &SplitPlan,
    k: usize,
    config: &ExperimentConfig,
    run: u64,
) -> Result<(u64, u64)> {
    let mut erased = design.clone();
    for i in plan.test(k) {
        for v in &mut erased.x[i] {
            *v = f64::NAN;
        }
    }
    Ok((
        split_fingerprint(design, plan, k, config, run)?,
        split_fingerprint(&erased, plan, k, config, run)?,
    ))
}

struct RunOutcome {
    auc: f64,
    scores: Vec<f64>,
    selected: Vec<Vec<FeatureId>>,
}

fn run_once(design: &Design, config: &ExperimentConfig, run: u64, ids: &[String]) -> Result<RunOutcome> {
    let plan = make_loocv_splits(&design.y, run)?;
    let global = global_selection(design, config, run)?;
    let outcomes: Vec<Result<([f64; 2], Vec<FeatureId>)>> = (0..plan.len())
        .into_par_iter()
        .map(|k| {
            let fit = fit_split(
                design,
                &plan.train(k),
                config,
                global.as_ref(),
                rng::derive_seed(run, &[k as u64]),
            )
            .map_err(|e| context(e, run, k, &plan, ids))?;
            let [p, n] = plan.test(k);
            Ok((
                [fit.predict(design, p), fit.predict(design, n)],
                fit.selection.selected.clone(),
            ))
        })
        .collect();
    let mut sum = vec![0.0; design.len()];
    let mut count = vec![0usize; design.len()];
    let mut selected = Vec::with_capacity(plan.len());
    for (k, o) in outcomes.into_iter().enumerate() {
        let (s, sel) = o?;
        for (i, v) in plan.test(k).into_iter().zip(s) {
            sum[i] += v;
            count[i] += 1;
        }
        selected.push(sel);
    }
    let scores: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
    let (pos, neg) = split_by_label(&scores, &design.y);
    Ok(RunOutcome {
        auc: auc(&pos, &neg)?,
        scores,
        selected,
    })
}

fn split_by_label(scores: &[f64], y: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&s, &l) in scores.iter().zip(y) {
        if l {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    (pos, neg)
}

/// Paired leave-one-out evaluation repeated over the configured seeds.
pub fn run_experiment(matrix: &CohortMatrix, config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    matrix.require_both_classes()?;
    let design = Design::from_matrix(matrix, &config.scenario.feature_ids());
    let ids = matrix.subject_ids();
    let runs: Vec<RunOutcome> = config
        .seeds
        .iter()
        .map(|&s| run_once(&design, config, s, &ids))
        .collect::<Result<_>>()?;
    let per_run_auc: Vec<f64> = runs.iter().map(|r| r.auc).collect();
    let mean_auc = per_run_auc.iter().sum::<f64>() / per_run_auc.len() as f64;
    let mean_scores: Vec<f64> = (0..design.len())
        .map(|i| runs.iter().map(|r| r.scores[i]).sum::<f64>() / runs.len() as f64)
        .collect();
    let (pos, neg) = split_by_label(&mean_scores, &design.y);
    let mut selection_counts = BTreeMap::new();
    let mut fits = 0;
    for r in &runs {
        for sel in &r.selected {
            fits += 1;
            for &id in sel {
                *selection_counts.entry(id).or_insert(0) += 1;
            }
        }
    }
    Ok(EvalReport {
        scenario: config.scenario,
        selector: config.selection.method,
        model: config.model.kind,
        selection_mode: config.mode(),
        seeds: config.seeds.clone(),
        per_run_auc,
        mean_auc,
        roc: roc_curve(&pos, &neg)?,
        per_subject_scores: ids.into_iter().zip(mean_scores).collect(),
        selection_counts,
        fits,
        config: config.clone(),
    })
}
