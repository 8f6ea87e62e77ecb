//! The 284-feature schema and per-subject extraction.

mod extract;
mod io;
mod matrix;
mod registry;
mod stats;

pub use extract::{
    bedtime_minutes, ecg_slopes, extract_all, extract_dataset, extract_ds4, extract_ds6,
    extract_ds7, extract_ds8, extract_ds9, is_weekend, wake_minutes, ACTIVE_DAY_MIN,
    LAST_WEEK_DAYS, REGULAR_TOLERANCE_MIN, RESTFUL_REM_SHARE,
};
pub use io::{
    features_header, read_features_csv, write_features_csv, write_registry_json, FEATURES_FILE,
    REGISTRY_FILE,
};
pub use matrix::{CohortMatrix, FeatureVector};
pub use registry::{DayPart, Dataset, FeatureEntry, FeatureId, FeatureRegistry, FEATURE_COUNT};
pub use stats::{
    descriptive_stats, estimated_hba1c, glucose_band_fractions, glucose_cv, mean_std,
    partition_by_daypart, rmssd, DescriptiveStats,
};

#[cfg(test)]
mod tests;
