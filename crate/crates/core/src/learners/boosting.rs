use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use super::tree::{grow, Newton, Tree, TreeParams};
use crate::numeric::sigmoid;

/// Halvings tried before a round is skipped.
const MAX_BACKTRACK: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub base_score: f64,
    /// Each tree with the step applied to its output.
    pub trees: Vec<(Tree, f64)>,
    /// Training log-loss after the prior and after every round.
    pub loss_trace: Vec<f64>,
}

pub fn log_loss(f: &[f64], y: &[bool]) -> f64 {
    let s: f64 = f
        .iter()
        .zip(y)
        .map(|(&fi, &yi)| {
            // log(1 + e^-m) with margin m
            let m = if yi { fi } else { -fi };
            if m > 0.0 {
                (-m).exp().ln_1p()
            } else {
                -m + m.exp().ln_1p()
            }
        })
        .sum();
    s / f.len() as f64
}

impl GradientBoosting {
    pub fn fit(x: &[Vec<f64>], y: &[bool], spec: &ModelSpec) -> Self {
        let n = x.len();
        let pos = y.iter().filter(|v| **v).count() as f64;
        let prior = (pos / n as f64).clamp(1e-6, 1.0 - 1e-6);
        let base_score = (prior / (1.0 - prior)).ln();
        let lr = spec.param("learning_rate");
        let params = TreeParams {
            max_depth: spec.count("max_depth"),
            min_leaf: spec.param("min_samples_leaf"),
            mtry: None,
        };
        let lambda = spec.param("lambda");
        let mut f = vec![base_score; n];
        let mut loss = log_loss(&f, y);
        let mut trace = vec![loss];
        let mut trees = Vec::new();
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..spec.count("n_trees") {
            for i in 0..n {
                let p = sigmoid(f[i]);
                g[i] = p - if y[i] { 1.0 } else { 0.0 };
                h[i] = p * (1.0 - p);
            }
            let crit = Newton {
                g: &g,
                h: &h,
                lambda,
            };
            let grown = grow(x, (0..n).collect(), &crit, &params, None);
            let out: Vec<f64> = x.iter().map(|r| grown.tree.predict(r)).collect();
            let mut step = lr;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACK {
                let trial: Vec<f64> = f.iter().zip(&out).map(|(a, b)| a + step * b).collect();
                let l = log_loss(&trial, y);
                if l <= loss {
                    accepted = Some((trial, l));
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some((trial, l)) => {
                    f = trial;
                    loss = l;
                    trees.push((grown.tree, step));
                }
                None => {
                    trace.push(loss);
                    break;
                }
            }
            trace.push(loss);
        }
        Self {
            base_score,
            trees,
            loss_trace: trace,
        }
    }

    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .map(|(t, s)| s * t.predict(row))
                .sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}
