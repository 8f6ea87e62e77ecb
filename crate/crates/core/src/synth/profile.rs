use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Group means and within-group spread of one latent signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub positive: f64,
    pub negative: f64,
    pub std: f64,
}

impl Effect {
    pub const fn new(positive: f64, negative: f64, std: f64) -> Self {
        Self {
            positive,
            negative,
            std,
        }
    }

    pub fn mean_for(&self, positive: bool) -> f64 {
        if positive {
            self.positive
        } else {
            self.negative
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.positive + self.negative)
    }

    /// Standardized group difference.
    pub fn cohens_d(&self) -> f64 {
        if self.std > 0.0 {
            (self.positive - self.negative) / self.std
        } else {
            0.0
        }
    }
}

/// Latent signals the generator understands.
pub const SIGNALS: [&str; 24] = [
    "age",
    "glucose_mean",
    "glucose_cv",
    "hr_mean",
    "resting_hr",
    "exercise_hr",
    "nonrem_hr",
    "session_hr",
    "calories",
    "steps",
    "exercise_count",
    "exercise_duration",
    "sedentary_minutes",
    "mvpa_minutes",
    "spo2",
    "sleep_duration",
    "awake_minutes",
    "deep_minutes",
    "rem_minutes",
    "sleep_score",
    "sleep_end_time",
    "sleep_points",
    "responsiveness_points",
    "exertion_points",
];

/// Signals belonging to the emotional-state block.
pub const EMOTIONAL_SIGNALS: [&str; 3] =
    ["sleep_points", "responsiveness_points", "exertion_points"];

/// Map from signal name to its planted effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EffectProfile(pub BTreeMap<String, Effect>);

impl EffectProfile {
    /// Group columns of the cohort summary. Durations are minutes,
    /// `exercise_count` is per 14 days, `sleep_end_time` is minutes after
    /// midnight.
    pub fn calibrated() -> Self {
        let rows: [(&str, Effect); 24] = [
            ("age", Effect::new(52.0, 45.0, 12.5)),
            ("glucose_mean", Effect::new(100.87, 98.85, 7.0)),
            ("glucose_cv", Effect::new(16.64, 14.68, 3.5)),
            ("hr_mean", Effect::new(75.81, 75.63, 6.4)),
            ("resting_hr", Effect::new(62.78, 62.93, 7.5)),
            ("exercise_hr", Effect::new(100.81, 101.84, 9.5)),
            ("nonrem_hr", Effect::new(59.56, 60.72, 8.0)),
            ("session_hr", Effect::new(69.76, 70.22, 9.2)),
            ("calories", Effect::new(3019.0, 2932.0, 410.0)),
            ("steps", Effect::new(11356.0, 10601.0, 3950.0)),
            ("exercise_count", Effect::new(14.20, 15.92, 10.0)),
            ("exercise_duration", Effect::new(38.78, 36.19, 16.0)),
            ("sedentary_minutes", Effect::new(717.0, 724.0, 99.0)),
            ("mvpa_minutes", Effect::new(68.18, 63.05, 40.0)),
            ("spo2", Effect::new(94.00, 94.20, 1.25)),
            ("sleep_duration", Effect::new(414.0, 431.0, 50.0)),
            ("awake_minutes", Effect::new(55.0, 53.0, 12.0)),
            ("deep_minutes", Effect::new(58.0, 64.0, 14.0)),
            ("rem_minutes", Effect::new(74.0, 82.0, 19.0)),
            ("sleep_score", Effect::new(74.10, 75.80, 4.3)),
            ("sleep_end_time", Effect::new(450.0, 485.0, 40.0)),
            ("sleep_points", Effect::new(30.33, 32.24, 4.0)),
            ("responsiveness_points", Effect::new(21.87, 23.87, 2.4)),
            ("exertion_points", Effect::new(23.50, 23.73, 2.4)),
        ];
        Self(rows.iter().map(|(k, e)| (k.to_string(), *e)).collect())
    }

    /// Every signal at its calibrated midpoint for both groups.
    pub fn null() -> Self {
        Self::calibrated().scaled(0.0)
    }

    /// Scales every group difference by `factor`, keeping midpoints and
    /// spreads.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(
            self.0
                .iter()
                .map(|(k, e)| {
                    let mid = e.midpoint();
                    let half = 0.5 * (e.positive - e.negative) * factor;
                    (k.clone(), Effect::new(mid + half, mid - half, e.std))
                })
                .collect(),
        )
    }

    /// Removes the group difference from the emotional-state signals.
    pub fn without_emotional_state(&self) -> Self {
        let mut out = self.clone();
        for name in EMOTIONAL_SIGNALS {
            if let Some(e) = out.0.get_mut(name) {
                let mid = e.midpoint();
                e.positive = mid;
                e.negative = mid;
            }
        }
        out
    }

    pub fn get(&self, name: &str) -> Effect {
        self.0
            .get(name)
            .copied()
            .unwrap_or_else(|| EffectProfile::calibrated().0[name])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in &self.0 {
            if !SIGNALS.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown signal {name:?}; known signals: {}",
                    SIGNALS.join(", ")
                )));
            }
            if !(e.std >= 0.0) || !e.positive.is_finite() || !e.negative.is_finite() {
                return Err(Error::Config(format!("invalid effect for {name}")));
            }
        }
        Ok(())
    }
}

impl Default for EffectProfile {
    fn default() -> Self {
        Self::calibrated()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub n_positive: usize,
    pub n_negative: usize,
    pub days: u32,
    pub effects: EffectProfile,
    pub seed: u64,
    pub start_date: NaiveDate,
    /// Local UTC offset of every recording, minutes.
    pub utc_offset_min: i32,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            n_positive: 55,
            n_negative: 38,
            days: 14,
            effects: EffectProfile::calibrated(),
            seed: 0,
            start_date: NaiveDate::from_ymd_opt(2022, 3, 7).expect("valid date"),
            utc_offset_min: 60,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_positive == 0 || self.n_negative == 0 {
            return Err(Error::Config("both group sizes must be positive".into()));
        }
        if self.days < 2 {
            return Err(Error::Config("need at least 2 intervention days".into()));
        }
        if self.utc_offset_min.abs() >= 24 * 60 {
            return Err(Error::Config("UTC offset out of range".into()));
        }
        self.effects.validate()
    }

    pub fn len(&self) -> usize {
        self.n_positive + self.n_negative
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
