use chrono::{DateTime, FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall-clock instant carrying the offset it was recorded with.
pub type Timestamp = DateTime<FixedOffset>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
        }
    }
}

/// Binary outcome: did the subject lose at least 2% of the initial weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "lost_ge_2pct")]
    LostGe2Pct,
    #[serde(rename = "lost_lt_2pct")]
    LostLt2Pct,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::LostGe2Pct)
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::LostGe2Pct
        } else {
            Label::LostLt2Pct
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::LostGe2Pct => "lost_ge_2pct",
            Label::LostLt2Pct => "lost_lt_2pct",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "lost_ge_2pct" | "1" => Some(Label::LostGe2Pct),
            "lost_lt_2pct" | "0" => Some(Label::LostLt2Pct),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub subject_id: String,
    pub age: u32,
    pub sex: Sex,
    pub height_cm: f64,
    pub initial_weight_kg: f64,
    pub final_weight_kg: f64,
    pub intervention_start: NaiveDate,
    pub intervention_end: NaiveDate,
}

impl SubjectMeta {
    pub fn validate(&self) -> Result<()> {
        if self.age < 18 {
            return Err(Error::domain(format!("age {} below 18", self.age)));
        }
        if !(self.initial_weight_kg > 0.0 && self.initial_weight_kg.is_finite()) {
            return Err(Error::domain("initial weight must be positive"));
        }
        if !(self.final_weight_kg > 0.0 && self.final_weight_kg.is_finite()) {
            return Err(Error::domain("final weight must be positive"));
        }
        if !(self.height_cm > 0.0 && self.height_cm.is_finite()) {
            return Err(Error::domain("height must be positive"));
        }
        if self.intervention_end <= self.intervention_start {
            return Err(Error::domain("intervention end must follow its start"));
        }
        Ok(())
    }
}

/// Which bounded time series a file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// Interstitial glucose, mg/dL.
    Cgm,
    /// Heart rate, bpm.
    Hr,
}

impl SeriesKind {
    /// Open physiological bounds; values outside are rejected at parse time
    /// and dropped during standardization.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            SeriesKind::Cgm => (0.0, 1000.0),
            SeriesKind::Hr => (20.0, 250.0),
        }
    }

    pub fn accepts(self, v: f64) -> bool {
        let (lo, hi) = self.bounds();
        v.is_finite() && v > lo && v < hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub at: Timestamp,
    pub value: f64,
}

impl Sample {
    pub fn new(at: Timestamp, value: f64) -> Self {
        Self { at, value }
    }
}

/// A CGM or heart-rate stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub kind: SeriesKind,
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn new(kind: SeriesKind) -> Self {
        Self {
            kind,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyActivityRecord {
    pub date: NaiveDate,
    pub calories: f64,
    pub steps: f64,
    pub distance_km: f64,
    pub sedentary_min: f64,
    pub lightly_min: f64,
    pub moderately_min: f64,
    pub very_min: f64,
    pub fat_burn_min: f64,
    pub cardio_min: f64,
    pub peak_min: f64,
    pub below_zone1_min: f64,
    pub zone1_min: f64,
    pub zone2_min: f64,
    pub zone3_min: f64,
    pub vo2max: Option<f64>,
    pub resting_hr: Option<f64>,
}

impl DailyActivityRecord {
    pub fn minute_fields(&self) -> [(&'static str, f64); 11] {
        [
            ("sedentary_min", self.sedentary_min),
            ("lightly_min", self.lightly_min),
            ("moderately_min", self.moderately_min),
            ("very_min", self.very_min),
            ("fat_burn_min", self.fat_burn_min),
            ("cardio_min", self.cardio_min),
            ("peak_min", self.peak_min),
            ("below_zone1_min", self.below_zone1_min),
            ("zone1_min", self.zone1_min),
            ("zone2_min", self.zone2_min),
            ("zone3_min", self.zone3_min),
        ]
    }

    /// Moderate-to-vigorous activity minutes.
    pub fn mvpa_min(&self) -> f64 {
        self.moderately_min + self.very_min
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.minute_fields() {
            if !(0.0..=1440.0).contains(&v) {
                return Err(Error::domain(format!(
                    "{}: {name} = {v} outside [0, 1440]",
                    self.date
                )));
            }
        }
        let levels = self.sedentary_min + self.lightly_min + self.moderately_min + self.very_min;
        if levels > 1440.0 {
            return Err(Error::domain(format!(
                "{}: activity-level minutes sum to {levels} > 1440",
                self.date
            )));
        }
        let zones = self.below_zone1_min + self.zone1_min + self.zone2_min + self.zone3_min;
        if zones > 1440.0 {
            return Err(Error::domain(format!(
                "{}: heart-rate zone minutes sum to {zones} > 1440",
                self.date
            )));
        }
        if !(self.steps >= 0.0 && self.calories >= 0.0 && self.distance_km >= 0.0) {
            return Err(Error::domain(format!(
                "{}: negative steps, calories or distance",
                self.date
            )));
        }
        if let Some(hr) = self.resting_hr {
            if !SeriesKind::Hr.accepts(hr) {
                return Err(Error::domain(format!("{}: resting hr {hr}", self.date)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseSession {
    pub start: Timestamp,
    pub duration_min: f64,
    pub avg_hr: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BreathingRate {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub snr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SleepStage {
    Full,
    Deep,
    Light,
    Rem,
}

impl SleepStage {
    pub const ALL: [SleepStage; 4] = [
        SleepStage::Full,
        SleepStage::Deep,
        SleepStage::Light,
        SleepStage::Rem,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SleepStage::Full => "full",
            SleepStage::Deep => "deep",
            SleepStage::Light => "light",
            SleepStage::Rem => "rem",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageBreathing {
    pub full: BreathingRate,
    pub deep: BreathingRate,
    pub light: BreathingRate,
    pub rem: BreathingRate,
}

impl StageBreathing {
    pub fn stage(&self, stage: SleepStage) -> &BreathingRate {
        match stage {
            SleepStage::Full => &self.full,
            SleepStage::Deep => &self.deep,
            SleepStage::Light => &self.light,
            SleepStage::Rem => &self.rem,
        }
    }

    pub fn stage_mut(&mut self, stage: SleepStage) -> &mut BreathingRate {
        match stage {
            SleepStage::Full => &mut self.full,
            SleepStage::Deep => &mut self.deep,
            SleepStage::Light => &mut self.light,
            SleepStage::Rem => &mut self.rem,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SleepScores {
    pub overall: Option<f64>,
    pub composition: Option<f64>,
    pub revitalization: Option<f64>,
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleepEpisode {
    pub start: Timestamp,
    pub end: Timestamp,
    pub asleep_min: f64,
    pub awake_min: f64,
    pub deep_min: f64,
    pub light_min: f64,
    pub rem_min: f64,
    /// Percent, 0-100.
    pub efficiency: f64,
    pub awakenings: u32,
    pub spo2_avg: Option<f64>,
    pub spo2_lower: Option<f64>,
    pub spo2_upper: Option<f64>,
    pub nightly_temp_delta: Option<f64>,
    pub breathing: StageBreathing,
    pub restlessness: Option<f64>,
    pub scores: SleepScores,
    pub nightly_rmssd: Option<f64>,
    pub nonrem_hr: Option<f64>,
}

impl SleepEpisode {
    /// Time in bed, minutes.
    pub fn span_min(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 60.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.end <= self.start {
            return Err(Error::domain(format!(
                "sleep episode {} ends before it starts",
                self.start
            )));
        }
        let minutes = [
            self.asleep_min,
            self.awake_min,
            self.deep_min,
            self.light_min,
            self.rem_min,
        ];
        if minutes.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::domain("negative sleep-stage minutes"));
        }
        // one minute of slack for device rounding
        let staged = self.deep_min + self.light_min + self.rem_min + self.awake_min;
        if staged > self.span_min() + 1.0 {
            return Err(Error::domain(format!(
                "sleep episode {}: stage minutes {staged} exceed time in bed {}",
                self.start,
                self.span_min()
            )));
        }
        if !(0.0..=100.0).contains(&self.efficiency) {
            return Err(Error::domain(format!("sleep efficiency {}", self.efficiency)));
        }
        let s = &self.scores;
        for v in [s.overall, s.composition, s.revitalization, s.duration]
            .into_iter()
            .flatten()
        {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::domain(format!("sleep score {v} outside [0, 100]")));
            }
        }
        for v in [self.spo2_avg, self.spo2_lower, self.spo2_upper]
            .into_iter()
            .flatten()
        {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::domain(format!("SpO2 {v} outside [0, 100]")));
            }
        }
        if let Some(r) = self.restlessness {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::domain(format!("restlessness {r} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdaSample {
    /// Seconds since session start.
    pub t_s: f64,
    pub scl_us: f64,
    pub hr_bpm: Option<f64>,
}

/// Window, in seconds, used for the session-begin and session-end heart rate.
pub const EDA_HR_EDGE_S: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaSession {
    pub session_id: String,
    pub start: Timestamp,
    pub hrv_baseline_ms: Option<f64>,
    pub samples: Vec<EdaSample>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl EdaSession {
    pub fn scl(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.scl_us).collect()
    }

    pub fn hr_mean(&self) -> Option<f64> {
        mean_of(self.samples.iter().filter_map(|s| s.hr_bpm))
    }

    /// Mean bpm over the first 30 s.
    pub fn hr_begin(&self) -> Option<f64> {
        let t0 = self.samples.first()?.t_s;
        mean_of(
            self.samples
                .iter()
                .filter(|s| s.t_s < t0 + EDA_HR_EDGE_S)
                .filter_map(|s| s.hr_bpm),
        )
    }

    /// Mean bpm over the last 30 s.
    pub fn hr_end(&self) -> Option<f64> {
        let t1 = self.samples.last()?.t_s;
        mean_of(
            self.samples
                .iter()
                .filter(|s| s.t_s > t1 - EDA_HR_EDGE_S)
                .filter_map(|s| s.hr_bpm),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::Session {
            session_id: self.session_id.clone(),
            message,
        };
        if self.samples.is_empty() {
            return Err(err("EDA session has no SCL samples".into()));
        }
        if let Some(s) = self.samples.iter().find(|s| !(s.scl_us >= 0.0)) {
            return Err(err(format!("negative SCL {}", s.scl_us)));
        }
        if self.samples.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
            return Err(err("EDA sample times must increase".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcgSample {
    pub t_s: f64,
    pub mv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcgSession {
    pub session_id: String,
    pub start: Timestamp,
    pub session_hr: f64,
    pub waveform: Vec<EcgSample>,
}

impl EcgSession {
    pub fn sampling_interval(&self) -> Option<f64> {
        match self.waveform.as_slice() {
            [a, b, ..] => Some(b.t_s - a.t_s),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |message: String| Error::Session {
            session_id: self.session_id.clone(),
            message,
        };
        let dt = self
            .sampling_interval()
            .ok_or_else(|| err("ECG session needs at least 2 samples".into()))?;
        if !(dt > 0.0) {
            return Err(err(format!("non-positive sampling interval {dt}")));
        }
        let tol = 1e-6 * dt + 1e-9;
        if self
            .waveform
            .windows(2)
            .any(|w| ((w[1].t_s - w[0].t_s) - dt).abs() > tol)
        {
            return Err(err("ECG sampling interval is not uniform".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressDailyRecord {
    pub date: NaiveDate,
    pub stress_score: f64,
    pub sleep_points: f64,
    pub responsiveness_points: f64,
    pub exertion_points: f64,
}

impl StressDailyRecord {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stress_score", self.stress_score),
            ("sleep_points", self.sleep_points),
            ("responsiveness_points", self.responsiveness_points),
            ("exertion_points", self.exertion_points),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::domain(format!(
                    "{}: {name} = {v} outside [0, 100]",
                    self.date
                )));
            }
        }
        Ok(())
    }
}

/// Everything recorded for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectBundle {
    pub meta: SubjectMeta,
    pub glucose: TimeSeries,
    pub hr: TimeSeries,
    pub daily: Vec<DailyActivityRecord>,
    pub exercises: Vec<ExerciseSession>,
    pub sleeps: Vec<SleepEpisode>,
    pub eda: Vec<EdaSession>,
    pub ecg: Vec<EcgSession>,
    pub stress: Vec<StressDailyRecord>,
}

impl SubjectBundle {
    pub fn empty(meta: SubjectMeta) -> Self {
        Self {
            meta,
            glucose: TimeSeries::new(SeriesKind::Cgm),
            hr: TimeSeries::new(SeriesKind::Hr),
            daily: Vec::new(),
            exercises: Vec::new(),
            sleeps: Vec::new(),
            eda: Vec::new(),
            ecg: Vec::new(),
            stress: Vec::new(),
        }
    }
}
