//! End-to-end orchestration: ingest, extract, statistics, selection and
//! evaluation, each stage writing its artifacts into one output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cohortstats::{
    default_summary_fields, group_summary_table, pearson_matrix, strong_pairs, GroupTestResult,
    StrongPair,
};
use crate::error::{Error, Result};
use crate::eval::{
    run_experiment, write_eval_json, write_roc_csv, EvalReport, ExperimentConfig, ResultsTable,
    EVAL_FILE, RESULTS_TABLE_FILE, ROC_FILE,
};
use crate::features::{write_features_csv, write_registry_json, CohortMatrix, FEATURES_FILE, REGISTRY_FILE};
use crate::ingest::{label_subject, load_cohort, standardize_bundle, CleaningReport, SubjectMeta};
use crate::select::{self, write_selection_json, Design, SelectionResult, SELECTION_FILE};

pub const CORR_FILE: &str = "corr.csv";
pub const SUMMARY_FILE: &str = "summary.json";
/// Absolute correlation treated as strong.
pub const STRONG_CORRELATION: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Directory holding `subjects.csv` and one folder per subject.
    pub cohort: PathBuf,
    pub output: PathBuf,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub verbose: bool,
    /// Write corr.csv and summary.json.
    pub stats: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            cohort: PathBuf::from("cohort"),
            output: PathBuf::from("out"),
            experiment: ExperimentConfig::default(),
            threads: 0,
            verbose: false,
            stats: true,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.cohort.is_dir() {
            return Err(Error::Config(format!(
                "cohort directory {} does not exist",
                self.cohort.display()
            )));
        }
        self.experiment.validate()
    }
}

/// Runs `f` on a pool of `threads` workers (0 = the global pool). Results do
/// not depend on the count.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Cleaned subjects with their labels and cleaning reports, manifest order.
pub struct IngestedCohort {
    pub matrix: CohortMatrix,
    pub metas: Vec<SubjectMeta>,
    pub cleaning: Vec<CleaningReport>,
}

/// Loads, standardizes, labels and featurizes a cohort directory.
pub fn ingest_and_extract(cohort: &Path) -> Result<IngestedCohort> {
    let raw = load_cohort(cohort)?;
    let mut bundles = Vec::with_capacity(raw.len());
    let mut cleaning = Vec::with_capacity(raw.len());
    for b in raw {
        let (b, report) = standardize_bundle(b);
        bundles.push(b);
        cleaning.push(report);
    }
    let labels: Vec<_> = bundles.iter().map(|b| label_subject(&b.meta)).collect();
    let metas = bundles.iter().map(|b| b.meta.clone()).collect();
    let matrix = CohortMatrix::from_bundles(&bundles, &labels)?;
    Ok(IngestedCohort {
        matrix,
        metas,
        cleaning,
    })
}

/// features.csv and registry.json.
pub fn write_features(out: &Path, matrix: &CohortMatrix) -> Result<()> {
    create_dir(out)?;
    write_features_csv(&out.join(FEATURES_FILE), matrix)?;
    write_registry_json(&out.join(REGISTRY_FILE))
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsSummary {
    pub groups: Vec<GroupTestResult>,
    pub strong_correlation_threshold: f64,
    pub strong_pairs: Vec<StrongPair>,
}

/// corr.csv and summary.json. Age and sex rows need `metas`.
pub fn write_stats(out: &Path, matrix: &CohortMatrix, metas: Option<&[SubjectMeta]>) -> Result<StatsSummary> {
    create_dir(out)?;
    let corr = pearson_matrix(matrix);
    corr.write_csv(&out.join(CORR_FILE))?;
    let mut fields = default_summary_fields();
    if metas.is_none() {
        fields.retain(|f| matches!(f, crate::cohortstats::SummaryField::Feature(_)));
    }
    let summary = StatsSummary {
        groups: group_summary_table(matrix, &fields, metas)?,
        strong_correlation_threshold: STRONG_CORRELATION,
        strong_pairs: strong_pairs(&corr, STRONG_CORRELATION),
    };
    let path = out.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

/// Descriptive selection on the whole cohort (selection.json). Evaluation
/// never reuses it; each split selects again on its own training rows.
pub fn write_selection(out: &Path, matrix: &CohortMatrix, config: &ExperimentConfig) -> Result<SelectionResult> {
    create_dir(out)?;
    let design = Design::from_matrix(matrix, &config.scenario.feature_ids());
    let mut sel = config.selection.clone();
    if sel.scorer_model.is_none() {
        sel.scorer_model = Some(config.model.clone());
    }
    sel.max_features = sel.max_features.min(design.width());
    let result = select::select(&design, &sel)?;
    write_selection_json(&out.join(SELECTION_FILE), &sel, &result)?;
    Ok(result)
}

/// eval.json, roc.csv, and the cell's entry in results_table.csv (merged
/// with any cells already there).
pub fn write_evaluation(out: &Path, matrix: &CohortMatrix, config: &ExperimentConfig) -> Result<EvalReport> {
    create_dir(out)?;
    let report = run_experiment(matrix, config)?;
    write_eval_json(&out.join(EVAL_FILE), &report)?;
    write_roc_csv(&out.join(ROC_FILE), &report.roc)?;
    let table_path = out.join(RESULTS_TABLE_FILE);
    let mut table = ResultsTable::read(&table_path)?;
    table.insert(&report);
    table.write(&table_path)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: EvalReport,
    pub selection: SelectionResult,
    pub artifacts: Vec<PathBuf>,
}

/// Runs every stage and writes the full artifact set into `config.output`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;
    with_threads(config.threads, || run_stages(config))?
}

fn run_stages(config: &PipelineConfig) -> Result<PipelineOutcome> {
    let out = &config.output;
    let say = |msg: &str| {
        if config.verbose {
            eprintln!("wearlab: {msg}");
        }
    };
    say(&format!("loading {}", config.cohort.display()));
    let cohort = ingest_and_extract(&config.cohort)?;
    let dropped: usize = cohort.cleaning.iter().map(|c| c.total_dropped()).sum();
    say(&format!(
        "{} subjects, {dropped} records dropped in cleaning",
        cohort.matrix.len()
    ));
    write_features(out, &cohort.matrix)?;
    let mut artifacts = vec![out.join(FEATURES_FILE), out.join(REGISTRY_FILE)];
    if config.stats {
        say("cohort statistics");
        write_stats(out, &cohort.matrix, Some(&cohort.metas))?;
        artifacts.extend([out.join(CORR_FILE), out.join(SUMMARY_FILE)]);
    }
    say(&format!("selection ({})", config.experiment.selection.method));
    let selection = write_selection(out, &cohort.matrix, &config.experiment)?;
    artifacts.push(out.join(SELECTION_FILE));
    say("evaluation");
    let report = write_evaluation(out, &cohort.matrix, &config.experiment)?;
    artifacts.extend([out.join(EVAL_FILE), out.join(ROC_FILE), out.join(RESULTS_TABLE_FILE)]);
    say(&format!("mean AUC {:.4}", report.mean_auc));
    Ok(PipelineOutcome {
        report,
        selection,
        artifacts,
    })
}
