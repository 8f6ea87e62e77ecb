use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::eval::auc;
use crate::features::{CohortMatrix, FeatureId};
use crate::learners::{self, ModelSpec, MAX_MISSING_SHARE};
use crate::rng;

/// Rows restricted to a set of feature columns, with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub ids: Vec<FeatureId>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl Design {
    pub fn new(ids: Vec<FeatureId>, x: Vec<Vec<f64>>, y: Vec<bool>) -> Result<Self> {
        if x.len() != y.len() || x.iter().any(|r| r.len() != ids.len()) {
            return Err(Error::Domain("design shape does not match its ids and labels".to_string()));
        }
        Ok(Self { ids, x, y })
    }

    pub fn from_matrix(m: &CohortMatrix, ids: &[FeatureId]) -> Self {
        let x = m
            .rows
            .iter()
            .map(|r| ids.iter().map(|id| r.values[id.index()]).collect())
            .collect();
        Self {
            ids: ids.to_vec(),
            x,
            y: m.positives(),
        }
    }

    pub fn width(&self) -> usize {
        self.ids.len()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// The given rows only.
    pub fn rows(&self, idx: &[usize]) -> Design {
        Design {
            ids: self.ids.clone(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// The given columns of the given rows.
    pub fn project(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.x[i][j]).collect())
            .collect()
    }

    /// Columns the preprocessor would keep: at most half missing and not
    /// constant.
    pub fn usable_columns(&self) -> Vec<usize> {
        (0..self.width())
            .filter(|&j| {
                let present: Vec<f64> =
                    self.x.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
                let missing = self.len() - present.len();
                !present.is_empty()
                    && missing as f64 <= MAX_MISSING_SHARE * self.len() as f64
                    && present.iter().any(|&v| v != present[0])
            })
            .collect()
    }

    /// Univariate separation `|AUC - 0.5|` of one column, missing rows skipped.
    pub fn univariate_strength(&self, j: usize) -> f64 {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (r, &l) in self.x.iter().zip(&self.y) {
            if r[j].is_finite() {
                if l {
                    pos.push(r[j]);
                } else {
                    neg.push(r[j]);
                }
            }
        }
        auc(&pos, &neg).map_or(0.0, |a| (a - 0.5).abs())
    }

    /// The `k` univariately strongest of `cols` (ties to the lower id),
    /// returned in ascending feature-id order. `k = 0` keeps all.
    pub fn prescreen(&self, cols: &[usize], k: usize) -> Vec<usize> {
        let mut keep = if k == 0 || k >= cols.len() {
            cols.to_vec()
        } else {
            let mut scored: Vec<(f64, usize)> =
                cols.iter().map(|&j| (self.univariate_strength(j), j)).collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(self.ids[a.1].cmp(&self.ids[b.1])));
            scored[..k].iter().map(|s| s.1).collect()
        };
        keep.sort_by_key(|&j| self.ids[j]);
        keep
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Config("cv_folds must be at least 2".to_string()));
    }
    let mut out = vec![0; y.len()];
    for (tag, class) in [(1u64, true), (0, false)] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::Domain(format!(
                "{} subjects of class {} cannot fill {folds} stratified folds",
                idx.len(),
                if class { "positive" } else { "negative" }
            )));
        }
        idx.shuffle(&mut rng::stream(seed, &[0x666f6c64, tag]));
        for (k, i) in idx.into_iter().enumerate() {
            out[i] = k % folds;
        }
    }
    Ok(out)
}

/// Precomputed folds so that many subsets are scored on identical splits.
#[derive(Debug, Clone)]
pub struct CvPlan {
    /// (train rows, test rows) per fold.
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
    pub seed: u64,
}

impl CvPlan {
    pub fn new(y: &[bool], folds: usize, seed: u64) -> Result<Self> {
        let assign = stratified_folds(y, folds, seed)?;
        let folds = (0..folds)
            .map(|f| {
                let (test, train): (Vec<usize>, Vec<usize>) =
                    (0..y.len()).partition(|&i| assign[i] == f);
                (train, test)
            })
            .collect();
        Ok(Self { folds, seed })
    }

    /// Mean held-out AUC of `spec` on columns `cols`. Columns are fed to the
    /// model in feature-id order, so the score ignores column layout.
    pub fn score(&self, design: &Design, cols: &[usize], spec: &ModelSpec) -> Result<f64> {
        if cols.is_empty() {
            return Err(Error::Domain("cannot score an empty feature subset".to_string()));
        }
        let mut cols = cols.to_vec();
        cols.sort_by_key(|&j| design.ids[j]);
        let cols = &cols[..];
        let mut total = 0.0;
        for (k, (train, test)) in self.folds.iter().enumerate() {
            let xt = design.project(train, cols);
            let yt: Vec<bool> = train.iter().map(|&i| design.y[i]).collect();
            let model = learners::fit(
                &spec.clone().with_seed(rng::derive_seed(self.seed, &[k as u64])),
                &xt,
                &yt,
            )?;
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (&i, r) in test.iter().zip(design.project(test, cols)) {
                let p = model.predict_proba(&r);
                if design.y[i] {
                    pos.push(p);
                } else {
                    neg.push(p);
                }
            }
            total += auc(&pos, &neg)?;
        }
        Ok(total / self.folds.len() as f64)
    }
}

/// Mean stratified-CV AUC of `spec` using feature columns `cols`.
pub fn cv_score(
    design: &Design,
    cols: &[usize],
    spec: &ModelSpec,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    CvPlan::new(&design.y, folds, seed)?.score(design, cols, spec)
}
