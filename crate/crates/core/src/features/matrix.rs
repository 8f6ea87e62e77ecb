use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extract::extract_all;
use super::registry::{FeatureId, FeatureRegistry, FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::ingest::{Label, SubjectBundle};

/// One subject's feature values. Missing entries are NaN and flagged in
/// `missing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl FeatureVector {
    /// Non-finite values are normalised to NaN and marked missing.
    pub fn new(subject_id: String, mut values: Vec<f64>) -> Self {
        assert_eq!(values.len(), FEATURE_COUNT, "feature vector length");
        let missing = values
            .iter_mut()
            .map(|v| {
                if v.is_finite() {
                    false
                } else {
                    *v = f64::NAN;
                    true
                }
            })
            .collect();
        Self {
            subject_id,
            values,
            missing,
        }
    }

    pub fn get(&self, id: FeatureId) -> Option<f64> {
        (!self.missing[id.index()]).then(|| self.values[id.index()])
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|m| **m).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortMatrix {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<Label>,
}

impl CohortMatrix {
    pub fn new(rows: Vec<FeatureVector>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Ok(Self { rows, labels })
    }

    /// Extracts every subject in parallel, preserving input order. Bundles
    /// must already be standardized.
    pub fn from_bundles(bundles: &[SubjectBundle], labels: &[Label]) -> Result<Self> {
        let rows = bundles.par_iter().map(extract_all).collect();
        Self::new(rows, labels.to_vec())
    }

    pub fn registry(&self) -> &'static FeatureRegistry {
        FeatureRegistry::global()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, id: FeatureId) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[id.index()]).collect()
    }

    pub fn positives(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l.is_positive()).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        (pos, self.labels.len() - pos)
    }

    /// Errors unless both classes are present.
    pub fn require_both_classes(&self) -> Result<()> {
        let (p, n) = self.class_counts();
        if p == 0 || n == 0 {
            return Err(Error::Config(format!(
                "need both classes, got {p} positive and {n} negative subjects"
            )));
        }
        Ok(())
    }

    pub fn subject_ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.subject_id.clone()).collect()
    }
}
