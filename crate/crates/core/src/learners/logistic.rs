use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use crate::numeric::sigmoid;

/// L2-penalized logistic regression; the intercept is not penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
}

impl Logistic {
    /// Iteratively reweighted least squares.
    pub fn fit(x: &[Vec<f64>], y: &[bool], spec: &ModelSpec) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let l2 = spec.param("l2");
        let tol = spec.param("tol");
        let max_iter = spec.count("max_iter").max(1);
        let design = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
        let target = DVector::from_fn(n, |i, _| if y[i] { 1.0 } else { 0.0 });
        let mut beta = DVector::zeros(d + 1);
        let mut iterations = 0;
        for it in 0..max_iter {
            iterations = it + 1;
            let eta = &design * &beta;
            let p = eta.map(sigmoid);
            let w = p.map(|v| (v * (1.0 - v)).max(1e-10));
            // gradient of the penalized negative log-likelihood
            let mut grad = design.transpose() * (&p - &target);
            let mut hess = design.transpose() * DMatrix::from_diagonal(&w) * &design;
            for j in 1..=d {
                grad[j] += l2 * beta[j];
                hess[(j, j)] += l2;
            }
            // tiny ridge on the intercept keeps separable data solvable
            hess[(0, 0)] += 1e-10;
            let step = match hess.clone().cholesky() {
                Some(c) => c.solve(&grad),
                None => match hess.lu().solve(&grad) {
                    Some(s) => s,
                    None => break,
                },
            };
            beta -= &step;
            if step.amax() < tol {
                break;
            }
        }
        Self {
            intercept: beta[0],
            weights: beta.iter().skip(1).copied().collect(),
            iterations,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}
