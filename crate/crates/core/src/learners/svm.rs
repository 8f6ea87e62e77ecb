use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use crate::numeric::sigmoid;

/// Kernel SVM (RBF) trained by SMO with maximal-violating-pair selection,
/// followed by a monotone logistic calibration of the decision value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub gamma: f64,
    pub support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    /// Calibration `p = sigmoid(a * f + b)` with `a > 0`.
    pub platt_a: f64,
    pub platt_b: f64,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Fits `p = sigmoid(a f + b)` by Newton's method on the smoothed targets of
/// Platt's method, keeping `a` positive.
pub fn platt_scale(f: &[f64], y: &[bool]) -> (f64, f64) {
    let pos = y.iter().filter(|v| **v).count() as f64;
    let neg = y.len() as f64 - pos;
    let hi = (pos + 1.0) / (pos + 2.0);
    let lo = 1.0 / (neg + 2.0);
    let t: Vec<f64> = y.iter().map(|&v| if v { hi } else { lo }).collect();
    let nll = |a: f64, b: f64| -> f64 {
        f.iter()
            .zip(&t)
            .map(|(&fi, &ti)| {
                let z = a * fi + b;
                // -t log s(z) - (1 - t) log(1 - s(z))
                let log1pexp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                log1pexp - ti * z
            })
            .sum()
    };
    let (mut a, mut b) = (1.0, ((pos + 1.0) / (neg + 1.0)).ln());
    let mut cur = nll(a, b);
    for _ in 0..100 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 1e-12, 0.0, 1e-12);
        for (&fi, &ti) in f.iter().zip(&t) {
            let p = sigmoid(a * fi + b);
            let r = p - ti;
            let w = p * (1.0 - p);
            ga += r * fi;
            gb += r;
            haa += w * fi * fi;
            hab += w * fi;
            hbb += w;
        }
        let det = haa * hbb - hab * hab;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-10 {
            let (na, nb) = (a - step * da, b - step * db);
            let v = nll(na, nb);
            if v < cur - 1e-15 {
                a = na;
                b = nb;
                cur = v;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved || (da.abs() < 1e-10 && db.abs() < 1e-10) {
            break;
        }
    }
    if !(a > 1e-6) {
        // keep the calibration increasing in the decision value
        a = 1e-6;
        let mut lo_b = -50.0;
        let mut hi_b = 50.0;
        for _ in 0..200 {
            let m = 0.5 * (lo_b + hi_b);
            let g: f64 = f.iter().zip(&t).map(|(&fi, &ti)| sigmoid(a * fi + m) - ti).sum();
            if g > 0.0 {
                hi_b = m;
            } else {
                lo_b = m;
            }
        }
        b = 0.5 * (lo_b + hi_b);
    }
    (a, b)
}

impl Svm {
    pub fn fit(x: &[Vec<f64>], y: &[bool], spec: &ModelSpec) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len).max(1);
        let c = spec.param("c");
        let tol = spec.param("tol");
        let gamma = match spec.param("gamma") {
            g if g > 0.0 => g,
            _ => 1.0 / d as f64,
        };
        let yy: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rbf(&x[i], &x[j], gamma)).collect())
            .collect();
        let mut alpha = vec![0.0; n];
        // gradient of the dual objective 0.5 a'Qa - e'a
        let mut grad = vec![-1.0; n];
        let max_iter = spec.count("max_iter");
        for _ in 0..max_iter {
            // maximal violating pair
            let mut i_up = None;
            let mut g_max = f64::NEG_INFINITY;
            let mut i_low = None;
            let mut g_min = f64::INFINITY;
            for t in 0..n {
                let v = -yy[t] * grad[t];
                let in_up = (yy[t] > 0.0 && alpha[t] < c) || (yy[t] < 0.0 && alpha[t] > 0.0);
                let in_low = (yy[t] > 0.0 && alpha[t] > 0.0) || (yy[t] < 0.0 && alpha[t] < c);
                if in_up && v > g_max {
                    g_max = v;
                    i_up = Some(t);
                }
                if in_low && v < g_min {
                    g_min = v;
                    i_low = Some(t);
                }
            }
            let (Some(i), Some(j)) = (i_up, i_low) else {
                break;
            };
            if g_max - g_min < tol {
                break;
            }
            let quad = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(1e-12);
            // step along y_i e_i - y_j e_j
            let mut delta = (g_max - g_min) / quad;
            let bound = |t: usize, dir: f64| -> f64 {
                // largest step keeping alpha_t + dir * step in [0, c]
                if dir > 0.0 {
                    c - alpha[t]
                } else {
                    alpha[t]
                }
            };
            delta = delta.min(bound(i, yy[i])).min(bound(j, -yy[j]));
            alpha[i] += yy[i] * delta;
            alpha[j] -= yy[j] * delta;
            for t in 0..n {
                grad[t] += yy[t] * (k[t][i] * delta - k[t][j] * delta);
            }
        }
        // bias from free vectors, else the midpoint of the violation bounds
        let free: Vec<f64> = (0..n)
            .filter(|&t| alpha[t] > 1e-8 && alpha[t] < c - 1e-8)
            .map(|t| -yy[t] * grad[t])
            .collect();
        let bias = if free.is_empty() {
            let mut ub = f64::INFINITY;
            let mut lb = f64::NEG_INFINITY;
            for t in 0..n {
                let v = -yy[t] * grad[t];
                let at_upper = alpha[t] >= c - 1e-8;
                let at_lower = alpha[t] <= 1e-8;
                if (yy[t] > 0.0 && at_lower) || (yy[t] < 0.0 && at_upper) {
                    ub = ub.min(v);
                } else {
                    lb = lb.max(v);
                }
            }
            if ub.is_finite() && lb.is_finite() {
                0.5 * (ub + lb)
            } else if ub.is_finite() {
                ub
            } else if lb.is_finite() {
                lb
            } else {
                0.0
            }
        } else {
            free.iter().sum::<f64>() / free.len() as f64
        };
        let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 1e-12).collect();
        let mut svm = Svm {
            gamma,
            support: sv.iter().map(|&t| x[t].clone()).collect(),
            coef: sv.iter().map(|&t| alpha[t] * yy[t]).collect(),
            bias,
            platt_a: 1.0,
            platt_b: 0.0,
        };
        let dec: Vec<f64> = x.iter().map(|r| svm.decision(r)).collect();
        let (a, b) = platt_scale(&dec, y);
        svm.platt_a = a;
        svm.platt_b = b;
        svm
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias
            + self
                .support
                .iter()
                .zip(&self.coef)
                .map(|(s, c)| c * rbf(s, row, self.gamma))
                .sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.platt_a * self.decision(row) + self.platt_b)
    }
}
