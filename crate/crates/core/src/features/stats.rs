//! Per-series primitives used by the extractors.

use chrono::Timelike;

use super::registry::DayPart;
use crate::error::{Error, Result};
use crate::ingest::Sample;
use crate::numeric;

/// `(mean, std, variance, max, min, range)` over a list of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub std: f64,
    pub variance: f64,
    pub max: f64,
    pub min: f64,
    pub range: f64,
}

impl DescriptiveStats {
    pub fn of(xs: &[f64]) -> Option<Self> {
        let mean = numeric::mean(xs)?;
        let variance = numeric::variance(xs)?;
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        Some(Self {
            mean,
            std: variance.sqrt(),
            variance,
            max,
            min,
            range: max - min,
        })
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.mean,
            self.std,
            self.variance,
            self.max,
            self.min,
            self.range,
        ]
    }
}

/// Six values in stat order, NaN when `xs` is empty.
pub fn descriptive_stats(xs: &[f64]) -> [f64; 6] {
    DescriptiveStats::of(xs).map_or([f64::NAN; 6], DescriptiveStats::to_array)
}

/// `[mean, std]`, NaN when empty.
pub fn mean_std(xs: &[f64]) -> [f64; 2] {
    match DescriptiveStats::of(xs) {
        Some(s) => [s.mean, s.std],
        None => [f64::NAN; 2],
    }
}

/// Splits a series into `[all, morning, afternoon, evening, night]` by
/// local clock time.
pub fn partition_by_daypart(samples: &[Sample]) -> [Vec<f64>; 5] {
    let mut parts: [Vec<f64>; 5] = Default::default();
    for s in samples {
        parts[0].push(s.value);
        let idx = match DayPart::of_hour(s.at.hour()) {
            DayPart::Morning => 1,
            DayPart::Afternoon => 2,
            DayPart::Evening => 3,
            _ => 4,
        };
        parts[idx].push(s.value);
    }
    parts
}

pub const VERY_LOW_BELOW: f64 = 54.0;
pub const LOW_BELOW: f64 = 70.0;
pub const TARGET_MAX: f64 = 180.0;
pub const HIGH_MAX: f64 = 250.0;

/// Percent of readings per band, ordered
/// `[very_high, high, target, low, very_low]` to match the feature blocks.
pub fn glucose_band_fractions(values: &[f64]) -> [f64; 5] {
    if values.is_empty() {
        return [f64::NAN; 5];
    }
    let mut counts = [0usize; 5];
    for &v in values {
        let band = if v < VERY_LOW_BELOW {
            4
        } else if v < LOW_BELOW {
            3
        } else if v <= TARGET_MAX {
            2
        } else if v <= HIGH_MAX {
            1
        } else {
            0
        };
        counts[band] += 1;
    }
    let n = values.len() as f64;
    counts.map(|c| 100.0 * c as f64 / n)
}

/// Estimated HbA1c (%) from mean glucose (mg/dL).
pub fn estimated_hba1c(mean_glucose: f64) -> Result<f64> {
    if !(mean_glucose > 0.0) || !mean_glucose.is_finite() {
        return Err(Error::Domain(format!(
            "mean glucose must be positive, got {mean_glucose}"
        )));
    }
    Ok((mean_glucose + 46.7) / 28.7)
}

/// Coefficient of variation in percent.
pub fn glucose_cv(values: &[f64]) -> Option<f64> {
    let s = DescriptiveStats::of(values)?;
    (s.mean > 0.0).then(|| 100.0 * s.std / s.mean)
}

/// Root mean square of successive differences.
pub fn rmssd(intervals: &[f64]) -> Option<f64> {
    if intervals.len() < 2 {
        return None;
    }
    let sq: Vec<f64> = intervals.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
    numeric::mean(&sq).map(f64::sqrt)
}
