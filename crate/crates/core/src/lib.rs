//! Weight-loss outcome prediction from multimodal wearable data.
//!
//! The crate covers the whole path from raw per-subject exports to
//! leave-one-out style evaluation:
//!
//! - [`ingest`] parses and cleans CSV exports into [`ingest::SubjectBundle`]s.
//! - [`features`] turns a bundle into the fixed 284-value feature vector.
//! - [`cohortstats`] computes correlations, group tests and FDR control.
//! - [`select`] holds the SFFS, Boruta and genetic feature selectors.
//! - [`learners`] holds the binary classifiers.
//! - [`eval`] runs the repeated one-subject-per-class hold-out protocol.
//! - [`synth`] generates synthetic cohorts with planted group differences.
//! - [`pipeline`] wires the stages together for the `wearlab` binary.

pub mod cohortstats;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod learners;
pub mod numeric;
pub mod pipeline;
pub mod rng;
pub mod select;
pub mod synth;

pub use error::{Error, Result};
