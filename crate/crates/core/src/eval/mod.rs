//! Paired leave-one-out evaluation, AUC and ROC.

mod experiment;
mod metrics;
mod report;
mod splits;

pub use experiment::{
    fit_split, leakage_audit, run_experiment, split_fingerprint, EvalReport, ExperimentConfig,
    Scenario, SelectionMode, SplitFit,
};
pub use metrics::{auc, roc_curve, trapezoid_area, RocPoint};
pub use report::{
    read_eval_json, write_eval_json, write_roc_csv, ResultsTable, EVAL_FILE, RESULTS_TABLE_FILE,
    ROC_FILE,
};
pub use splits::{make_loocv_splits, Split, SplitPlan};

#[cfg(test)]
mod tests;
