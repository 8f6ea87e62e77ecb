//! Cohort statistics: correlation, group tests and FDR control.

mod correlation;
mod fdr;
mod hypothesis;
mod summary;

pub use correlation::{
    pearson, pearson_matrix, pearson_matrix_of, strong_pairs, write_strong_pairs_csv,
    CorrelationMatrix, StrongPair,
};
pub use fdr::bh_fdr;
pub use hypothesis::{chi_square_test, rank_sum_normal, rank_sum_test, TestOutcome, EXACT_MAX_N};
pub use summary::{
    default_summary_fields, group_summary_table, render_summary, GroupStats, GroupTestResult,
    SummaryField, SUMMARY_FEATURES,
};
