//! Generates a small synthetic cohort, writes it in the export layout, reads
//! it back through ingestion and compares a few features between groups.

use wearlab::features::FeatureRegistry;
use wearlab::pipeline::ingest_and_extract;
use wearlab::synth::{generate_cohort, write_synthetic_cohort, CohortSpec};

fn main() -> wearlab::Result<()> {
    let spec = CohortSpec {
        n_positive: 12,
        n_negative: 10,
        days: 7,
        ..CohortSpec::default()
    };
    let cohort = generate_cohort(&spec)?;
    let dir = std::env::temp_dir().join("wearlab-example-cohort");
    let _ = std::fs::remove_dir_all(&dir);
    write_synthetic_cohort(&dir, &cohort)?;

    let ingested = ingest_and_extract(&dir)?;
    let m = &ingested.matrix;
    println!("{} subjects written to {}", m.len(), dir.display());

    let registry = FeatureRegistry::global();
    let pos = m.positives();
    for name in ["avg glucose all day", "glucose variability all day", "avg total sleep end time"] {
        let id = registry.lookup(name).expect("registered");
        let col = m.column(id);
        let mean = |want: bool| {
            let v: Vec<f64> = col.iter().zip(&pos).filter(|(x, p)| **p == want && x.is_finite()).map(|(x, _)| *x).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        println!("{name:32} lost >= 2%: {:8.2}  others: {:8.2}", mean(true), mean(false));
    }
    Ok(())
}
