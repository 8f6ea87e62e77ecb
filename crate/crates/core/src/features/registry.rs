//! The canonical ordered 284-feature schema.

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const FEATURE_COUNT: usize = 284;

/// 1-based feature number, `1..=284`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureId(u16);

impl FeatureId {
    pub fn new(id: usize) -> Option<Self> {
        (1..=FEATURE_COUNT)
            .contains(&id)
            .then_some(Self(id as u16))
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Zero-based column index.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        Self::new(index + 1).expect("feature index out of range")
    }

    /// Column label used in `features.csv`, e.g. `f008`.
    pub fn column(self) -> String {
        format!("f{:03}", self.0)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dataset {
    /// Biomarkers (CGM glucose).
    #[serde(rename = "DS4")]
    Ds4,
    /// Vital signs.
    #[serde(rename = "DS6")]
    Ds6,
    /// Physical activity.
    #[serde(rename = "DS7")]
    Ds7,
    /// Sleep activity.
    #[serde(rename = "DS8")]
    Ds8,
    /// Emotional state.
    #[serde(rename = "DS9")]
    Ds9,
}

impl Dataset {
    pub const ALL: [Dataset; 5] = [
        Dataset::Ds4,
        Dataset::Ds6,
        Dataset::Ds7,
        Dataset::Ds8,
        Dataset::Ds9,
    ];

    pub fn ids(self) -> RangeInclusive<usize> {
        match self {
            Dataset::Ds4 => 1..=65,
            Dataset::Ds6 => 66..=123,
            Dataset::Ds7 => 124..=167,
            Dataset::Ds8 => 168..=264,
            Dataset::Ds9 => 265..=284,
        }
    }

    pub fn len(self) -> usize {
        let r = self.ids();
        r.end() - r.start() + 1
    }

    pub fn label(self) -> &'static str {
        match self {
            Dataset::Ds4 => "DS4",
            Dataset::Ds6 => "DS6",
            Dataset::Ds7 => "DS7",
            Dataset::Ds8 => "DS8",
            Dataset::Ds9 => "DS9",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayPart {
    All,
    /// 06:00 to 12:00
    Morning,
    /// 12:00 to 18:00
    Afternoon,
    /// 18:00 to 24:00
    Evening,
    /// 00:00 to 06:00
    Night,
}

impl DayPart {
    /// Sub-feature order inside every day-parted block.
    pub const ORDER: [DayPart; 5] = [
        DayPart::All,
        DayPart::Morning,
        DayPart::Afternoon,
        DayPart::Evening,
        DayPart::Night,
    ];

    /// Clock part of a local hour, never `All`.
    pub fn of_hour(hour: u32) -> DayPart {
        match hour {
            0..=5 => DayPart::Night,
            6..=11 => DayPart::Morning,
            12..=17 => DayPart::Afternoon,
            _ => DayPart::Evening,
        }
    }

    fn phrase(self) -> &'static str {
        match self {
            DayPart::All => "all day",
            DayPart::Morning => "in the morning",
            DayPart::Afternoon => "in the afternoon",
            DayPart::Evening => "in the evening",
            DayPart::Night => "at night",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub id: FeatureId,
    pub name: String,
    pub dataset: Dataset,
    pub daypart: Option<DayPart>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    entries: Vec<FeatureEntry>,
    by_name: HashMap<String, FeatureId>,
}

fn normalize(name: &str) -> String {
    let trimmed = match name.rfind('(') {
        Some(i) if name.trim_end().ends_with(')') => &name[..i],
        _ => name,
    };
    trimmed
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

struct Builder {
    entries: Vec<FeatureEntry>,
    dataset: Dataset,
}

impl Builder {
    fn push(&mut self, name: String, daypart: Option<DayPart>) {
        let id = FeatureId::from_index(self.entries.len());
        self.entries.push(FeatureEntry {
            id,
            name,
            dataset: self.dataset,
            daypart,
        });
    }

    fn one(&mut self, name: &str) {
        self.push(name.to_string(), None);
    }

    fn dayparted(&mut self, base: &str) {
        for dp in DayPart::ORDER {
            self.push(format!("{base} {}", dp.phrase()), Some(dp));
        }
    }

    /// `template` with `{}` substituted by each item in order.
    fn each(&mut self, template: &str, items: &[&str]) {
        for item in items {
            self.push(template.replace("{}", item), None);
        }
    }
}

const STAGES: [&str; 4] = ["full", "deep", "light", "REM"];
const SPLITS: [&str; 3] = ["total", "weekdays", "weekend days"];
const DAY_SPLITS: [&str; 3] = ["days", "weekdays", "weekend days"];
const LEVELS: [&str; 3] = ["lightly", "moderately", "very"];

impl FeatureRegistry {
    fn build() -> Self {
        let mut b = Builder {
            entries: Vec::with_capacity(FEATURE_COUNT),
            dataset: Dataset::Ds4,
        };
        for base in [
            "avg glucose",
            "std of glucose",
            "glucose variance",
            "max of glucose",
            "min of glucose",
            "min-max difference of glucose",
            "% time in very high values",
            "% time in high values",
            "% time in target values",
            "% time in low values",
            "% time in very low values",
            "HB1Ac avg",
            "glucose variability",
        ] {
            b.dayparted(base);
        }

        b.dataset = Dataset::Ds6;
        for base in [
            "avg HR",
            "std of HR",
            "HR variance",
            "max of HR",
            "min of HR",
            "min-max difference of HR",
        ] {
            b.dayparted(base);
        }
        for what in [
            "resting HR",
            "HR during physical activity",
            "HR during non-REM sleep",
            "RMSSD during sleep",
            "HR during EDA sessions",
            "HR at the beginning of EDA sessions",
            "HR at the end of EDA sessions",
            "HRV baseline during EDA sessions",
        ] {
            b.one(&format!("avg {what}"));
            b.one(&format!("std of {what}"));
        }
        for of in ["", "std of "] {
            let ws = format!("{of}waveform slope from ECG sessions");
            b.one(&format!("avg {ws}"));
            b.one(&format!("std of {ws}"));
            b.one(&format!("variance of {ws}"));
            b.one(&format!("max of {ws}"));
            b.one(&format!("min of {ws}"));
            b.one(&format!("min-max difference of {ws}"));
        }

        b.dataset = Dataset::Ds7;
        for what in ["calories", "steps", "distance"] {
            b.one(&format!("avg {what}"));
            b.one(&format!("std of {what}"));
        }
        b.one("number of physical activities performed");
        b.one("avg duration of physical activities");
        b.each("avg {} minutes", &["fat burn", "cardio", "peak"]);
        b.each("std of {} minutes", &["fat burn", "cardio", "peak"]);
        b.one("avg sedentary minutes");
        b.one("std of sedentary minutes");
        b.each("avg {} active minutes", &LEVELS);
        b.each("std of {} active minutes", &LEVELS);
        b.one("avg minutes below default zone 1");
        b.one("std of minutes below default zone 1");
        b.each("avg minutes in default zone {}", &["1", "2", "3"]);
        b.each("std of minutes in default zone {}", &["1", "2", "3"]);
        b.one("avg demographic VO2 max");
        b.one("std of demographic VO2 max");
        b.each("% of days with >= 10 {} active min/day", &LEVELS);
        b.one("avg MVPA minutes");
        b.one("avg sedentary minutes last week");
        b.each("avg {} active minutes last week", &LEVELS);
        b.each("% of days with >= 10 {} active min/day last week", &LEVELS);
        b.one("avg MVPA minutes last week");

        b.dataset = Dataset::Ds8;
        for what in [
            "oxygen saturation during sleep",
            "lower bound oxygen saturation during sleep",
            "upper bound oxygen saturation during sleep",
        ] {
            b.one(&format!("avg {what}"));
            b.one(&format!("std of {what}"));
        }
        b.each("avg {} duration", &["asleep", "awake"]);
        b.each("std of {} duration", &["asleep", "awake"]);
        b.each("avg {} duration night sleep", &STAGES);
        b.each("std of {} duration night sleep", &STAGES);
        b.each("avg {} sleep breathing rate", &STAGES);
        b.each("std of {} sleep breathing rate", &STAGES);
        b.each("avg std of {} sleep breathing rate", &STAGES);
        b.each("std of std of {} sleep breathing rate", &STAGES);
        b.each("avg {} sleep breathing rate signal to noise", &STAGES);
        b.each("std of {} sleep breathing rate signal to noise", &STAGES);
        for what in [
            "nightly temperature",
            "composition score",
            "revitalization score",
            "duration score",
            "restlessness",
        ] {
            b.one(&format!("avg {what}"));
            b.one(&format!("std of {what}"));
        }
        b.each("avg {} overall sleep score", &SPLITS);
        b.one("std of overall sleep score");
        b.each("avg {} efficiency of night sleeps", &SPLITS);
        b.each("avg {} duration of night sleep", &SPLITS[1..]);
        b.each("avg {} sleep start time", &SPLITS);
        b.each("avg {} sleep end time", &SPLITS);
        b.each("avg {} times waking up during night sleep", &SPLITS);
        b.each("avg {} early waking up deviation time", &SPLITS);
        b.each("avg {} late waking up deviation time", &SPLITS);
        b.each("% of {} of regular wake-up", &DAY_SPLITS);
        b.each("% of {} of regular bedtime", &DAY_SPLITS);
        b.each("% of {} restful sleep with over 25% REM", &DAY_SPLITS);
        b.each("% of {} early waking time", &DAY_SPLITS);
        b.each("% of {} late waking time", &DAY_SPLITS);
        b.each("% of {} better restlessness variations", &DAY_SPLITS);
        b.each("% of {} worse restlessness variations", &DAY_SPLITS);

        b.dataset = Dataset::Ds9;
        for what in [
            "stress score",
            "sleep points",
            "responsiveness points",
            "exertion points",
        ] {
            b.one(&format!("avg {what}"));
            b.one(&format!("std of {what}"));
        }
        for name in [
            "avg SCL",
            "std of SCL",
            "SCL variance",
            "max SCL",
            "min SCL",
            "min-max difference of SCL",
            "avg std of SCL",
            "std of std of SCL",
            "variance of std of SCL",
            "max std of SCL",
            "min std of SCL",
            "min-max difference of std of SCL",
        ] {
            b.one(name);
        }

        assert_eq!(b.entries.len(), FEATURE_COUNT);
        let by_name = b
            .entries
            .iter()
            .map(|e| (normalize(&e.name), e.id))
            .collect();
        Self {
            entries: b.entries,
            by_name,
        }
    }

    /// Shared immutable instance.
    pub fn global() -> &'static FeatureRegistry {
        static REGISTRY: OnceLock<FeatureRegistry> = OnceLock::new();
        REGISTRY.get_or_init(FeatureRegistry::build)
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, id: FeatureId) -> &FeatureEntry {
        &self.entries[id.index()]
    }

    pub fn name(&self, id: FeatureId) -> &str {
        &self.entry(id).name
    }

    /// Resolves a feature name, case- and whitespace-insensitively. A
    /// trailing parenthesised number such as `(8)` is ignored.
    pub fn lookup(&self, name: &str) -> Option<FeatureId> {
        self.by_name.get(&normalize(name)).copied()
    }

    pub fn dataset_ids(&self, dataset: Dataset) -> Vec<FeatureId> {
        dataset
            .ids()
            .map(|i| FeatureId::new(i).expect("block id"))
            .collect()
    }
}
