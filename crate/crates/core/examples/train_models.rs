//! Fits every learner on half of a synthetic cohort and scores the other
//! half.

use wearlab::eval::auc;
use wearlab::features::{CohortMatrix, Dataset, FeatureRegistry};
use wearlab::learners::{fit, ModelKind, ModelSpec};
use wearlab::select::Design;
use wearlab::synth::{generate_cohort, CohortSpec, EffectProfile};

fn main() -> wearlab::Result<()> {
    let cohort = generate_cohort(&CohortSpec {
        effects: EffectProfile::calibrated().scaled(2.0),
        ..CohortSpec::default()
    })?;
    let m = CohortMatrix::from_bundles(&cohort.bundles, &cohort.labels)?;
    let ids = FeatureRegistry::global().dataset_ids(Dataset::Ds4);
    let d = Design::from_matrix(&m, &ids);

    let (train, test): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|i| i % 2 == 0);
    let cols: Vec<usize> = (0..d.width()).collect();
    let xtr = d.project(&train, &cols);
    let ytr: Vec<bool> = train.iter().map(|&i| d.y[i]).collect();
    let xte = d.project(&test, &cols);

    for kind in ModelKind::ALL {
        let model = fit(&ModelSpec::new(kind), &xtr, &ytr)?;
        let scores = model.predict_many(&xte);
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (s, &i) in scores.iter().zip(&test) {
            if d.y[i] { pos.push(*s) } else { neg.push(*s) }
        }
        println!("{:4} held-out AUC {:.3}", kind.as_str(), auc(&pos, &neg)?);
    }
    Ok(())
}
