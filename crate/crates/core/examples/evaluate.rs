//! Paired leave-one-out evaluation of logistic regression with SFFS on the
//! glucose block, two run seeds.

use wearlab::eval::{run_experiment, ExperimentConfig, Scenario};
use wearlab::features::{CohortMatrix, FeatureRegistry};
use wearlab::learners::{ModelKind, ModelSpec};
use wearlab::select::{Method, SelectionConfig};
use wearlab::synth::{generate_cohort, CohortSpec, EffectProfile};

fn main() -> wearlab::Result<()> {
    let cohort = generate_cohort(&CohortSpec {
        effects: EffectProfile::calibrated().scaled(3.0),
        ..CohortSpec::default()
    })?;
    let m = CohortMatrix::from_bundles(&cohort.bundles, &cohort.labels)?;
    let config = ExperimentConfig {
        scenario: Scenario::Ds4,
        selection: SelectionConfig {
            max_features: 5,
            candidate_pool: 20,
            cv_folds: 3,
            ..SelectionConfig::new(Method::Sffs)
        },
        model: ModelSpec::new(ModelKind::Lr),
        seeds: vec![0, 1],
        leaky_selection: false,
    };
    let report = run_experiment(&m, &config)?;
    println!("per-run AUC {:.3?}, mean {:.3}", report.per_run_auc, report.mean_auc);
    let registry = FeatureRegistry::global();
    for (id, count) in report.top_features(5) {
        println!("  chosen in {count:3} splits: {}", registry.name(id));
    }
    Ok(())
}
