//! The six classifiers, a shared preprocessing step, and a serializable
//! trained-model wrapper.

mod boosting;
mod forest;
mod knn;
mod logistic;
mod mlp;
mod preprocess;
mod spec;
mod svm;
pub mod tree;

pub use boosting::{log_loss, GradientBoosting};
pub use forest::RandomForest;
pub use knn::Knn;
pub use logistic::Logistic;
pub use mlp::{loss_and_grad, Mlp};
pub use preprocess::{Preprocessor, MAX_MISSING_SHARE};
pub use spec::{ModelKind, ModelSpec};
pub use svm::{platt_scale, Svm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Fitted {
    /// Used when no feature survives preprocessing.
    Prior { p: f64 },
    Rf(RandomForest),
    Gb(GradientBoosting),
    Lr(Logistic),
    Svm(Svm),
    Mlp(Mlp),
    Knn(Knn),
}

/// A fitted preprocessor plus classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub preprocessor: Preprocessor,
    pub fitted: Fitted,
}

/// Fits `spec` on raw rows (NaN = missing). Both classes must be present.
pub fn fit(spec: &ModelSpec, x: &[Vec<f64>], y: &[bool]) -> Result<TrainedModel> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "{} training rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let pos = y.iter().filter(|v| **v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::Domain(
            "training data must contain both classes".to_string(),
        ));
    }
    if let Some(w) = x.first().map(Vec::len) {
        if x.iter().any(|r| r.len() != w) {
            return Err(Error::Domain("ragged training rows".to_string()));
        }
    }
    let preprocessor = Preprocessor::fit(x);
    let z = preprocessor.transform(x);
    let fitted = if preprocessor.output_width() == 0 {
        Fitted::Prior {
            p: pos as f64 / y.len() as f64,
        }
    } else {
        match spec.kind {
            ModelKind::Rf => Fitted::Rf(RandomForest::fit(&z, y, spec)),
            ModelKind::Gb => Fitted::Gb(GradientBoosting::fit(&z, y, spec)),
            ModelKind::Lr => Fitted::Lr(Logistic::fit(&z, y, spec)),
            ModelKind::Svm => Fitted::Svm(Svm::fit(&z, y, spec)),
            ModelKind::Mlp => Fitted::Mlp(Mlp::fit(&z, y, spec)),
            ModelKind::Knn => Fitted::Knn(Knn::fit(&z, y, spec.count("k"))),
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        preprocessor,
        fitted,
    })
}

impl TrainedModel {
    /// Probability of the positive class for one raw row.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let z = self.preprocessor.transform_row(row);
        let p = match &self.fitted {
            Fitted::Prior { p } => *p,
            Fitted::Rf(m) => m.predict(&z),
            Fitted::Gb(m) => m.predict(&z),
            Fitted::Lr(m) => m.predict(&z),
            Fitted::Svm(m) => m.predict(&z),
            Fitted::Mlp(m) => m.predict(&z),
            Fitted::Knn(m) => m.predict(&z),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict_proba(r)).collect()
    }

    /// Impurity importance per raw input column; only forests provide one.
    pub fn importance(&self) -> Option<Vec<f64>> {
        let Fitted::Rf(rf) = &self.fitted else {
            return None;
        };
        let mut out = vec![0.0; self.preprocessor.width];
        for (k, &j) in self.preprocessor.kept.iter().enumerate() {
            out[j] = rf.importance[k];
        }
        Some(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
