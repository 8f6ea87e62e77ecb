//! Runs each selector on the glucose block of a planted synthetic cohort.

use wearlab::features::{CohortMatrix, Dataset, FeatureRegistry};
use wearlab::learners::{ModelKind, ModelSpec};
use wearlab::select::{select, Design, Method, SelectionConfig};
use wearlab::synth::{generate_cohort, CohortSpec, EffectProfile};

fn main() -> wearlab::Result<()> {
    let cohort = generate_cohort(&CohortSpec {
        effects: EffectProfile::calibrated().scaled(3.0),
        ..CohortSpec::default()
    })?;
    let m = CohortMatrix::from_bundles(&cohort.bundles, &cohort.labels)?;
    let registry = FeatureRegistry::global();
    let d = Design::from_matrix(&m, &registry.dataset_ids(Dataset::Ds4));

    for method in Method::ALL {
        let config = SelectionConfig {
            scorer_model: Some(ModelSpec::new(ModelKind::Lr)),
            max_features: 8,
            ga_generations: 15,
            ..SelectionConfig::new(method)
        };
        let r = select(&d, &config)?;
        let names: Vec<&str> = r.selected.iter().take(4).map(|&id| registry.name(id)).collect();
        let best = r.best_score().map_or("-".to_string(), |s| format!("{s:.3}"));
        println!("{:6} {:2} features, best CV AUC {best}: {names:?}", method.display_name(), r.selected.len());
    }
    Ok(())
}
