use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use super::tree::{grow, Gini, Tree, TreeParams};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
    /// Mean decrease in impurity, normalized per tree, averaged.
    pub importance: Vec<f64>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[bool], spec: &ModelSpec) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let n_trees = spec.count("n_trees");
        let max_depth = match spec.count("max_depth") {
            0 => usize::MAX,
            m => m,
        };
        let mtry = match spec.count("max_features") {
            0 => ((d as f64).sqrt().floor() as usize).max(1),
            m => m.min(d.max(1)),
        };
        let params = TreeParams {
            max_depth,
            min_leaf: spec.param("min_samples_leaf"),
            mtry: Some(mtry),
        };
        let grown: Vec<(Tree, Vec<f64>)> = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::stream(spec.seed, &[0x7265_6573, t as u64]);
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[r.random_range(0..n)] += 1.0;
                }
                let idx: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
                let g = grow(x, idx, &Gini { y, w: &w }, &params, Some(&mut r));
                let total: f64 = g.importance.iter().sum();
                let imp = if total > 0.0 {
                    g.importance.iter().map(|v| v / total).collect()
                } else {
                    vec![0.0; d]
                };
                (g.tree, imp)
            })
            .collect();
        let mut importance = vec![0.0; d];
        for (_, imp) in &grown {
            for (a, b) in importance.iter_mut().zip(imp) {
                *a += b;
            }
        }
        for v in &mut importance {
            *v /= n_trees as f64;
        }
        Self {
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            importance,
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        s / self.trees.len() as f64
    }
}
