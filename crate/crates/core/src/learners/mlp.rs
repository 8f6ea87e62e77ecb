use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::spec::ModelSpec;
use crate::numeric::sigmoid;
use crate::rng::{self, StreamRng};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One hidden layer of rectified units with a sigmoid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// Flat parameter vector, see [`Mlp::layout`].
    pub params: Vec<f64>,
}

impl Mlp {
    /// Parameter count for `inputs` x `hidden`: W1 (row-major, hidden rows),
    /// b1, w2, b2.
    pub fn layout(inputs: usize, hidden: usize) -> usize {
        hidden * inputs + hidden + hidden + 1
    }

    /// He-initialized network; biases start at zero.
    pub fn init(inputs: usize, hidden: usize, rng: &mut StreamRng) -> Self {
        let mut params = vec![0.0; Self::layout(inputs, hidden)];
        let s1 = (2.0 / inputs.max(1) as f64).sqrt();
        for p in &mut params[..hidden * inputs] {
            let z: f64 = StandardNormal.sample(rng);
            *p = z * s1;
        }
        let s2 = (2.0 / hidden as f64).sqrt();
        let w2 = hidden * inputs + hidden;
        for p in &mut params[w2..w2 + hidden] {
            let z: f64 = StandardNormal.sample(rng);
            *p = z * s2;
        }
        Self { inputs, hidden, params }
    }

    pub fn fit(x: &[Vec<f64>], y: &[bool], spec: &ModelSpec) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let hidden = spec.count("hidden");
        let epochs = spec.count("epochs");
        let lr = spec.param("learning_rate");
        let l2 = spec.param("l2");
        let batch = spec.count("batch_size").max(1);
        let mut r = rng::stream(spec.seed, &[0x6d6c70]);
        let mut net = Self::init(d, hidden, &mut r);
        let mut m = vec![0.0; net.params.len()];
        let mut v = vec![0.0; net.params.len()];
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut step = 0i32;
        let mut bx = Vec::with_capacity(batch);
        let mut by = Vec::with_capacity(batch);
        for _ in 0..epochs {
            order.shuffle(&mut r);
            for chunk in order.chunks(batch) {
                bx.clear();
                by.clear();
                for &i in chunk {
                    bx.push(x[i].as_slice());
                    by.push(y[i]);
                }
                let (_, g) = loss_and_grad(&net.params, d, hidden, &bx, &by, l2);
                step += 1;
                let c1 = 1.0 - BETA1.powi(step);
                let c2 = 1.0 - BETA2.powi(step);
                for k in 0..g.len() {
                    m[k] = BETA1 * m[k] + (1.0 - BETA1) * g[k];
                    v[k] = BETA2 * v[k] + (1.0 - BETA2) * g[k] * g[k];
                    net.params[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + ADAM_EPS);
                }
            }
        }
        net
    }

    pub fn raw_score(&self, row: &[f64]) -> f64 {
        forward(&self.params, self.inputs, self.hidden, row).1
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

/// Hidden pre-activations and output logit.
fn forward(p: &[f64], d: usize, h: usize, row: &[f64]) -> (Vec<f64>, f64) {
    let (w1, rest) = p.split_at(h * d);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let pre: Vec<f64> = (0..h)
        .map(|j| b1[j] + w1[j * d..(j + 1) * d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let out = b2[0] + pre.iter().zip(w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>();
    (pre, out)
}

/// Mean binary cross-entropy over the batch plus `0.5 * l2 * |W|^2` on the
/// weight matrices (not biases), with its gradient.
pub fn loss_and_grad(
    p: &[f64],
    d: usize,
    h: usize,
    x: &[&[f64]],
    y: &[bool],
    l2: f64,
) -> (f64, Vec<f64>) {
    let mut g = vec![0.0; p.len()];
    let n = x.len().max(1) as f64;
    let w2_at = h * d + h;
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let (pre, z) = forward(p, d, h, row);
        let t = if label { 1.0 } else { 0.0 };
        let log1pexp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        loss += log1pexp - t * z;
        let dz = (sigmoid(z) - t) / n;
        g[w2_at + h] += dz;
        for j in 0..h {
            if pre[j] > 0.0 {
                g[w2_at + j] += dz * pre[j];
                let dh = dz * p[w2_at + j];
                g[h * d + j] += dh;
                for (k, xv) in row.iter().enumerate() {
                    g[j * d + k] += dh * xv;
                }
            }
        }
    }
    loss /= n;
    let weights = (0..h * d).chain(w2_at..w2_at + h);
    for k in weights {
        loss += 0.5 * l2 * p[k] * p[k];
        g[k] += l2 * p[k];
    }
    (loss, g)
}
