//! Synthetic cohorts with planted group differences.
//!
//! Effects are planted on per-subject latent signals and then rendered into
//! raw streams (CGM, minute HR, daily records, sleep, EDA and ECG sessions),
//! so every extractor sees realistic inputs.

mod generate;
mod profile;

pub use generate::{generate_cohort, label_permutation, plant_label_permutation, Cohort};
pub use profile::{CohortSpec, Effect, EffectProfile, EMOTIONAL_SIGNALS, SIGNALS};

use std::path::Path;

use crate::error::Result;

/// Writes the cohort in the on-disk export layout.
pub fn write_synthetic_cohort(root: &Path, cohort: &Cohort) -> Result<()> {
    crate::ingest::write_cohort(root, &cohort.bundles)
}

#[cfg(test)]
mod tests;
