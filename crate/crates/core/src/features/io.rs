use std::fs;
use std::path::Path;

use super::matrix::{CohortMatrix, FeatureVector};
use super::registry::{FeatureEntry, FeatureId, FeatureRegistry, FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::ingest::Label;

pub const FEATURES_FILE: &str = "features.csv";
pub const REGISTRY_FILE: &str = "registry.json";

pub fn features_header() -> Vec<String> {
    let mut h = vec!["subject_id".to_string(), "label".to_string()];
    h.extend((0..FEATURE_COUNT).map(|i| FeatureId::from_index(i).column()));
    h
}

pub fn write_features_csv(path: &Path, matrix: &CohortMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(features_header())?;
    for (row, label) in matrix.rows.iter().zip(&matrix.labels) {
        let mut rec = vec![row.subject_id.clone(), label.as_str().to_string()];
        rec.extend(row.values.iter().zip(&row.missing).map(|(v, m)| {
            if *m {
                String::new()
            } else {
                format!("{v}")
            }
        }));
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_features_csv(path: &Path) -> Result<CohortMatrix> {
    let file_name = path.display().to_string();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(f);
    let header = r.headers()?.clone();
    let expected = features_header();
    for (i, col) in expected.iter().enumerate() {
        if header.get(i) != Some(col.as_str()) {
            return Err(Error::Schema {
                file: file_name,
                column: col.clone(),
            });
        }
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row_err = |message: String| Error::Row {
            file: file_name.clone(),
            line,
            message,
        };
        let label = Label::parse(&rec[1])
            .ok_or_else(|| row_err(format!("unknown label {:?}", &rec[1])))?;
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for i in 0..FEATURE_COUNT {
            let cell = rec.get(i + 2).unwrap_or("");
            values.push(if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse::<f64>()
                    .map_err(|_| row_err(format!("bad value {cell:?} in f{:03}", i + 1)))?
            });
        }
        rows.push(FeatureVector::new(rec[0].to_string(), values));
        labels.push(label);
    }
    CohortMatrix::new(rows, labels)
}

pub fn write_registry_json(path: &Path) -> Result<()> {
    let entries: &[FeatureEntry] = FeatureRegistry::global().entries();
    let text = serde_json::to_string_pretty(entries)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
