use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[bool], k: usize) -> Self {
        Self {
            k: k.min(x.len()).max(1),
            x: x.to_vec(),
            y: y.to_vec(),
        }
    }

    /// Share of positives among the `k` nearest training rows (Euclidean,
    /// ties broken by training index).
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let s: f64 = r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let pos = d[..self.k].iter().filter(|(_, i)| self.y[*i]).count();
        pos as f64 / self.k as f64
    }
}
