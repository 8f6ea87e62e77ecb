use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Rf,
    Gb,
    Lr,
    Svm,
    Mlp,
    Knn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Rf,
        ModelKind::Gb,
        ModelKind::Lr,
        ModelKind::Svm,
        ModelKind::Mlp,
        ModelKind::Knn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Rf => "rf",
            ModelKind::Gb => "gb",
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
            ModelKind::Mlp => "mlp",
            ModelKind::Knn => "knn",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Rf => "RF",
            ModelKind::Gb => "GB",
            ModelKind::Lr => "LR",
            ModelKind::Svm => "SVM",
            ModelKind::Mlp => "MLP",
            ModelKind::Knn => "KNN",
        }
    }

    /// Default value of every hyperparameter the kind accepts.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            // max_depth 0 = unlimited, max_features 0 = sqrt(d)
            ModelKind::Rf => &[
                ("n_trees", 200.0),
                ("max_depth", 0.0),
                ("min_samples_leaf", 1.0),
                ("max_features", 0.0),
            ],
            ModelKind::Gb => &[
                ("n_trees", 100.0),
                ("max_depth", 3.0),
                ("learning_rate", 0.1),
                ("min_samples_leaf", 1.0),
                ("lambda", 1.0),
            ],
            ModelKind::Lr => &[("l2", 1.0), ("tol", 1e-8), ("max_iter", 100.0)],
            // gamma 0 = 1/d
            ModelKind::Svm => &[("c", 1.0), ("gamma", 0.0), ("tol", 1e-3), ("max_iter", 100000.0)],
            ModelKind::Mlp => &[
                ("hidden", 32.0),
                ("epochs", 200.0),
                ("learning_rate", 1e-3),
                ("l2", 1e-4),
                ("batch_size", 16.0),
            ],
            ModelKind::Knn => &[("k", 5.0)],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown model kind {s:?}; valid kinds: {}",
                    ModelKind::ALL.map(|k| k.as_str()).join(", ")
                ))
            })
    }
}

/// Model kind, hyperparameter overrides and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Hyperparameter value, falling back to the kind's default.
    pub fn param(&self, key: &str) -> f64 {
        self.hyperparameters.get(key).copied().unwrap_or_else(|| {
            self.kind
                .defaults()
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("{} has no hyperparameter {key}", self.kind))
        })
    }

    pub fn count(&self, key: &str) -> usize {
        self.param(key) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let defaults = self.kind.defaults();
        for (key, &value) in &self.hyperparameters {
            if !defaults.iter().any(|(k, _)| k == key) {
                return Err(Error::Config(format!(
                    "{} does not take hyperparameter {key:?}; accepted: {}",
                    self.kind,
                    defaults.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", ")
                )));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Config(format!("{}.{key} = {value} is invalid", self.kind)));
            }
        }
        let positive = |key: &str| -> Result<()> {
            if self.param(key) > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{}.{key} must be positive", self.kind)))
            }
        };
        match self.kind {
            ModelKind::Rf => {
                positive("n_trees")?;
                positive("min_samples_leaf")
            }
            ModelKind::Gb => {
                positive("n_trees")?;
                positive("max_depth")?;
                positive("learning_rate")?;
                positive("min_samples_leaf")
            }
            ModelKind::Lr => positive("tol"),
            ModelKind::Svm => positive("c"),
            ModelKind::Mlp => {
                positive("hidden")?;
                positive("epochs")?;
                positive("learning_rate")?;
                positive("batch_size")
            }
            ModelKind::Knn => positive("k"),
        }
    }
}
