use std::collections::BTreeMap;
use std::path::Path;

use super::experiment::{EvalReport, Scenario};
use super::metrics::RocPoint;
use crate::error::{Error, Result};
use crate::learners::ModelKind;
use crate::select::Method;

pub const EVAL_FILE: &str = "eval.json";
pub const ROC_FILE: &str = "roc.csv";
pub const RESULTS_TABLE_FILE: &str = "results_table.csv";

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_eval_json(path: &Path, report: &EvalReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(path, text + "\n").map_err(io(path))
}

pub fn read_eval_json(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// `fpr,tpr,threshold`; the opening point's threshold is written `inf`.
pub fn write_roc_csv(path: &Path, roc: &[RocPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fpr", "tpr", "threshold"])?;
    for p in roc {
        w.write_record([p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])?;
    }
    w.flush().map_err(io(path))
}

/// Mean AUC in percent per (scenario, model) row and selector column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsTable {
    pub cells: BTreeMap<(Scenario, ModelKind), BTreeMap<Method, f64>>,
}

const COLUMNS: [Method; 4] = [Method::Sffs, Method::Boruta, Method::Genetic, Method::None];

impl ResultsTable {
    pub fn insert(&mut self, report: &EvalReport) {
        self.cells
            .entry((report.scenario, report.model))
            .or_default()
            .insert(report.selector, 100.0 * report.mean_auc);
    }

    pub fn get(&self, scenario: Scenario, model: ModelKind, method: Method) -> Option<f64> {
        self.cells.get(&(scenario, model))?.get(&method).copied()
    }

    /// Reads a table written by [`ResultsTable::write`]; a missing file gives
    /// an empty table.
    pub fn read(path: &Path) -> Result<Self> {
        let mut table = Self::default();
        if !path.exists() {
            return Ok(table);
        }
        let mut r = csv::Reader::from_path(path)?;
        for rec in r.records() {
            let rec = rec?;
            let scenario: Scenario = rec.get(0).unwrap_or_default().parse()?;
            let model = ModelKind::ALL
                .into_iter()
                .find(|k| Some(k.display_name()) == rec.get(1))
                .ok_or_else(|| Error::Config(format!("{}: unknown model row", path.display())))?;
            for (c, m) in COLUMNS.iter().enumerate() {
                if let Some(v) = rec.get(2 + c).filter(|v| !v.is_empty()) {
                    let v: f64 = v.parse().map_err(|_| {
                        Error::Config(format!("{}: bad cell {v:?}", path.display()))
                    })?;
                    table.cells.entry((scenario, model)).or_default().insert(*m, v);
                }
            }
        }
        Ok(table)
    }

    /// One row per (scenario, model) with any result; blank cells were not run.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["scenario".to_string(), "model".to_string()];
        header.extend(COLUMNS.iter().map(|m| m.display_name().to_string()));
        w.write_record(&header)?;
        for ((scenario, model), row) in &self.cells {
            let mut rec = vec![scenario.to_string(), model.display_name().to_string()];
            for m in COLUMNS {
                rec.push(row.get(&m).map_or(String::new(), |v| format!("{v:.2}")));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(io(path))
    }
}
