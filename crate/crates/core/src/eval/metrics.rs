use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Domain("AUC needs at least one score per class".to_string()));
    }
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sweep tie groups in ascending order, counting negatives below
    let mut below = 0u64;
    let mut twice_wins = 0u64;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        let (mut p, mut n) = (0u64, 0u64);
        while j < all.len() && all[j].0 == all[i].0 {
            if all[j].1 {
                p += 1;
            } else {
                n += 1;
            }
            j += 1;
        }
        twice_wins += p * (2 * below + n);
        below += n;
        i = j;
    }
    Ok(twice_wins as f64 / (2.0 * pos.len() as f64 * neg.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores at or above the threshold are called positive. The first point
    /// uses +inf, stored as null in JSON.
    #[serde(with = "infinite_as_null")]
    pub threshold: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// ROC curve from (0,0) to (1,1), one point per distinct score.
pub fn roc_curve(pos: &[f64], neg: &[f64]) -> Result<Vec<RocPoint>> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Domain("ROC needs at least one score per class".to_string()));
    }
    let mut thresholds: Vec<f64> = pos.iter().chain(neg).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    for t in thresholds {
        let tp = pos.iter().filter(|&&s| s >= t).count() as f64;
        let fp = neg.iter().filter(|&&s| s >= t).count() as f64;
        out.push(RocPoint {
            fpr: fp / nn,
            tpr: tp / np,
            threshold: t,
        });
    }
    Ok(out)
}

/// Trapezoidal area under a curve ordered by fpr.
pub fn trapezoid_area(curve: &[RocPoint]) -> f64 {
    curve
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}
