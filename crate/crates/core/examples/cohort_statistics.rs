//! Group comparison table and the strongest feature correlations of a
//! synthetic cohort.

use wearlab::cohortstats::{default_summary_fields, group_summary_table, pearson_matrix, render_summary, strong_pairs};
use wearlab::features::{CohortMatrix, FeatureRegistry};
use wearlab::synth::{generate_cohort, CohortSpec};

fn main() -> wearlab::Result<()> {
    let cohort = generate_cohort(&CohortSpec::default())?;
    let m = CohortMatrix::from_bundles(&cohort.bundles, &cohort.labels)?;
    let metas: Vec<_> = cohort.bundles.iter().map(|b| b.meta.clone()).collect();

    let rows = group_summary_table(&m, &default_summary_fields(), Some(&metas))?;
    println!("{}", render_summary(&rows));

    let registry = FeatureRegistry::global();
    let pairs = strong_pairs(&pearson_matrix(&m), 0.9);
    println!("{} feature pairs with |rho| > 0.9, strongest:", pairs.len());
    for p in pairs.iter().take(5) {
        println!("  {:+.3}  {} / {}", p.rho, registry.name(p.i), registry.name(p.j));
    }
    Ok(())
}
