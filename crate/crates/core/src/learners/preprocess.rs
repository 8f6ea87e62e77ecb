use serde::{Deserialize, Serialize};

use crate::numeric;

/// Largest share of missing training values a feature may have.
pub const MAX_MISSING_SHARE: f64 = 0.5;

/// Mean imputation followed by z-scoring, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    /// Input columns kept, in order.
    pub kept: Vec<usize>,
    /// Input columns dropped (too sparse or constant).
    pub dropped: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub width: usize,
}

impl Preprocessor {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for j in 0..width {
            let present: Vec<f64> = rows.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
            let missing = rows.len() - present.len();
            if present.is_empty() || missing as f64 > MAX_MISSING_SHARE * rows.len() as f64 {
                dropped.push(j);
                continue;
            }
            let mean = numeric::mean(&present).expect("non-empty");
            // imputed entries sit at the mean, so they add nothing to the sum
            let ss = numeric::sum(present.iter().map(|v| (v - mean) * (v - mean)));
            let std = (ss / rows.len() as f64).sqrt();
            if !(std > 1e-12 * mean.abs().max(1.0)) {
                dropped.push(j);
                continue;
            }
            kept.push(j);
            means.push(mean);
            stds.push(std);
        }
        Self {
            kept,
            dropped,
            means,
            stds,
            width,
        }
    }

    pub fn output_width(&self) -> usize {
        self.kept.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let v = if row[j].is_finite() { row[j] } else { self.means[k] };
                (v - self.means[k]) / self.stds[k]
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Order-sensitive digest of the fitted state.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for &k in &self.kept {
            eat(k as u64);
        }
        for v in self.means.iter().chain(&self.stds) {
            eat(v.to_bits());
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imputes_then_centres() {
        let p = Preprocessor::fit(&[vec![1.0], vec![3.0]]);
        assert_eq!(p.transform_row(&[f64::NAN]), vec![0.0]);
        assert_eq!(p.transform_row(&[3.0]), vec![1.0]);
    }

    #[test]
    fn drops_constant_and_sparse_columns() {
        let rows = vec![
            vec![5.0, 1.0, f64::NAN],
            vec![5.0, 2.0, f64::NAN],
            vec![5.0, 4.0, 1.0],
        ];
        let p = Preprocessor::fit(&rows);
        assert_eq!(p.kept, vec![1]);
        assert_eq!(p.dropped, vec![0, 2]);
        assert_eq!(p.transform_row(&rows[0]).len(), 1);
    }

    #[test]
    fn training_output_is_standardized() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, (i * i) as f64, if i % 3 == 0 { f64::NAN } else { i as f64 * 0.5 }])
            .collect();
        let p = Preprocessor::fit(&rows);
        let t = p.transform(&rows);
        for j in 0..p.output_width() {
            let col: Vec<f64> = t.iter().map(|r| r[j]).collect();
            assert!(numeric::mean(&col).unwrap().abs() < 1e-12);
            assert!((numeric::std_dev(&col).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
