//! Parsing and standardization of per-subject wearable exports.

mod csvio;
mod standardize;
mod types;

pub use csvio::*;
pub use standardize::{
    label_subject, standardize_bundle, CleaningReport, StreamDrops, Window,
    WEIGHT_LOSS_THRESHOLD,
};
pub use types::*;
