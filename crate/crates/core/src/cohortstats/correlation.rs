use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{CohortMatrix, FeatureId};
use crate::numeric;

/// Pearson correlation with pairwise deletion of non-finite entries.
/// `None` when fewer than two pairs remain or either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = numeric::sum(pairs.iter().map(|p| p.0)) / n;
    let my = numeric::sum(pairs.iter().map(|p| p.1)) / n;
    let sxy = numeric::sum(pairs.iter().map(|(a, b)| (a - mx) * (b - my)));
    let sxx = numeric::sum(pairs.iter().map(|(a, _)| (a - mx) * (a - mx)));
    let syy = numeric::sum(pairs.iter().map(|(_, b)| (b - my) * (b - my)));
    if !(sxx > 0.0 && syy > 0.0) {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub ids: Vec<FeatureId>,
    /// Row-major, `None` where undefined.
    pub rho: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.rho[i][j]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Writes the grid with a header row and column of feature ids; empty
    /// cells are undefined.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["feature".to_string()];
        header.extend(self.ids.iter().map(|id| id.to_string()));
        w.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.rho) {
            let mut rec = vec![id.to_string()];
            rec.extend(row.iter().map(|c| c.map_or(String::new(), |v| format!("{v}"))));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Correlation of every pair of `ids` columns.
pub fn pearson_matrix_of(matrix: &CohortMatrix, ids: &[FeatureId]) -> CorrelationMatrix {
    let cols: Vec<Vec<f64>> = ids.iter().map(|&id| matrix.column(id)).collect();
    let upper: Vec<Vec<Option<f64>>> = (0..ids.len())
        .into_par_iter()
        .map(|i| (i..ids.len()).map(|j| pearson(&cols[i], &cols[j])).collect())
        .collect();
    let n = ids.len();
    let mut rho = vec![vec![None; n]; n];
    for i in 0..n {
        for (k, v) in upper[i].iter().enumerate() {
            let j = i + k;
            rho[i][j] = *v;
            rho[j][i] = *v;
        }
        if rho[i][i].is_some() {
            rho[i][i] = Some(1.0);
        }
    }
    CorrelationMatrix {
        ids: ids.to_vec(),
        rho,
    }
}

/// Full 284 x 284 matrix.
pub fn pearson_matrix(matrix: &CohortMatrix) -> CorrelationMatrix {
    let ids: Vec<FeatureId> = (0..crate::features::FEATURE_COUNT)
        .map(FeatureId::from_index)
        .collect();
    pearson_matrix_of(matrix, &ids)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongPair {
    pub i: FeatureId,
    pub j: FeatureId,
    pub rho: f64,
}

/// Pairs with `|rho| > threshold`, strongest first.
pub fn strong_pairs(cm: &CorrelationMatrix, threshold: f64) -> Vec<StrongPair> {
    let mut out = Vec::new();
    for i in 0..cm.len() {
        for j in i + 1..cm.len() {
            if let Some(r) = cm.rho[i][j] {
                // at threshold 1.0 keep the exact +-1 pairs, up to rounding
                if r.abs() > threshold || (threshold >= 1.0 && r.abs() >= 1.0 - 1e-12) {
                    out.push(StrongPair {
                        i: cm.ids[i],
                        j: cm.ids[j],
                        rho: r,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        b.rho
            .abs()
            .total_cmp(&a.rho.abs())
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    out
}

pub fn write_strong_pairs_csv(path: &Path, pairs: &[StrongPair]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "rho"])?;
    for p in pairs {
        w.write_record([p.i.to_string(), p.j.to_string(), format!("{}", p.rho)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::ingest::Label;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 5.0, 3.0];
        assert_abs_diff_eq!(pearson(&x, &x).unwrap(), 1.0, epsilon = 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &neg).unwrap(), -1.0, epsilon = 1e-15);
        // mpmath at 50 digits
        assert_abs_diff_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap(),
            0.9819805060619655,
            epsilon = 1e-14
        );
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(pearson(&[1.0, f64::NAN], &[2.0, 3.0]), None);
    }

    #[test]
    fn pairwise_deletion() {
        let x = [1.0, 2.0, f64::NAN, 3.0];
        let y = [1.0, 2.0, 100.0, 4.0];
        assert_eq!(pearson(&x, &y), pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]));
    }

    fn cohort_with(cols: &[Vec<f64>]) -> CohortMatrix {
        let n = cols[0].len();
        let rows = (0..n)
            .map(|r| {
                let mut v = vec![f64::NAN; 284];
                for (c, col) in cols.iter().enumerate() {
                    v[c] = col[r];
                }
                FeatureVector::new(format!("S{r}"), v)
            })
            .collect();
        CohortMatrix::new(rows, vec![Label::LostGe2Pct; n]).unwrap()
    }

    #[test]
    fn matrix_shape_and_consistency() {
        let a = vec![1.0, 2.0, 3.0, 4.0, 6.0];
        let b = vec![2.0, 1.0, 4.0, 3.0, 5.0];
        let m = cohort_with(&[a.clone(), b.clone(), a.clone()]);
        let cm = pearson_matrix(&m);
        assert_eq!(cm.len(), 284);
        assert_eq!(cm.get(0, 0), Some(1.0));
        assert_eq!(cm.get(0, 1), pearson(&a, &b));
        assert_eq!(cm.get(1, 0), cm.get(0, 1));
        assert_abs_diff_eq!(cm.get(0, 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cm.get(5, 5), None);
    }

    #[test]
    fn strong_pairs_ordering() {
        // y = 0.9 x + sqrt(1 - 0.81) e with x, e orthonormal and centred
        let x = [1.0, -1.0, 1.0, -1.0];
        let e = [1.0, 1.0, -1.0, -1.0];
        let y: Vec<f64> = x
            .iter()
            .zip(e)
            .map(|(a, b)| 0.9 * a + (1.0f64 - 0.81).sqrt() * b)
            .collect();
        let z = [1.0, -1.0, -1.0, 1.0];
        let m = cohort_with(&[x.to_vec(), y, z.to_vec()]);
        let ids: Vec<FeatureId> = (0..3).map(FeatureId::from_index).collect();
        let cm = pearson_matrix_of(&m, &ids);
        let pairs = strong_pairs(&cm, 0.8);
        assert_eq!((pairs[0].i.get(), pairs[0].j.get()), (1, 2));
        assert_abs_diff_eq!(pairs[0].rho, 0.9, epsilon = 1e-12);
        assert!(strong_pairs(&cm, 1.0).is_empty());

        let dup = cohort_with(&[x.to_vec(), x.to_vec()]);
        let cm = pearson_matrix_of(&dup, &ids[..2]);
        assert_eq!(strong_pairs(&cm, 1.0).len(), 1);
    }

    #[test]
    fn identity_has_no_strong_pairs() {
        let ids: Vec<FeatureId> = (0..3).map(FeatureId::from_index).collect();
        let mut rho = vec![vec![Some(0.0); 3]; 3];
        for (i, row) in rho.iter_mut().enumerate() {
            row[i] = Some(1.0);
        }
        assert!(strong_pairs(&CorrelationMatrix { ids, rho }, 0.5).is_empty());
    }

    proptest! {
        #[test]
        fn pearson_symmetry_and_affine_invariance(
            xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            a in 0.1f64..10.0,
            b in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = xy.iter().map(|p| p.0).collect();
            let y: Vec<f64> = xy.iter().map(|p| p.1).collect();
            if let Some(r) = pearson(&x, &y) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert!((pearson(&y, &x).unwrap() - r).abs() < 1e-12);
                let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                prop_assert!((pearson(&ax, &y).unwrap() - r).abs() < 1e-9);
                let nx: Vec<f64> = x.iter().map(|v| -v).collect();
                prop_assert!((pearson(&nx, &y).unwrap() + r).abs() < 1e-12);
            }
        }
    }
}
