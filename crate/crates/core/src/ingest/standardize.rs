use std::collections::HashSet;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::types::*;

/// Per-stream drop counts from [`standardize_bundle`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamDrops {
    pub duplicates: usize,
    pub out_of_window: usize,
    pub out_of_bounds: usize,
    pub invalid: usize,
}

impl StreamDrops {
    pub fn total(&self) -> usize {
        self.duplicates + self.out_of_window + self.out_of_bounds + self.invalid
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub subject_id: String,
    pub glucose: StreamDrops,
    pub hr: StreamDrops,
    pub daily: StreamDrops,
    pub exercises: StreamDrops,
    pub sleeps: StreamDrops,
    pub eda: StreamDrops,
    pub ecg: StreamDrops,
    pub stress: StreamDrops,
    /// Human-readable reasons for records dropped as invalid.
    pub messages: Vec<String>,
}

impl CleaningReport {
    pub fn total_dropped(&self) -> usize {
        [
            &self.glucose,
            &self.hr,
            &self.daily,
            &self.exercises,
            &self.sleeps,
            &self.eda,
            &self.ecg,
            &self.stress,
        ]
        .iter()
        .map(|d| d.total())
        .sum()
    }
}

/// Inclusive calendar window `[start - 1 day, end + 1 day]`.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl Window {
    pub fn for_meta(meta: &SubjectMeta) -> Self {
        Self {
            first: meta
                .intervention_start
                .checked_sub_days(Days::new(1))
                .unwrap_or(meta.intervention_start),
            last: meta
                .intervention_end
                .checked_add_days(Days::new(1))
                .unwrap_or(meta.intervention_end),
        }
    }

    pub fn contains_date(&self, d: NaiveDate) -> bool {
        self.first <= d && d <= self.last
    }

    pub fn contains(&self, t: &Timestamp) -> bool {
        self.contains_date(t.date_naive())
    }
}

fn clean_series(series: &mut TimeSeries, window: Window, drops: &mut StreamDrops) {
    let kind = series.kind;
    // stable sort keeps read order among equal instants, so "keep first" is well defined
    series.samples.sort_by_key(|s| s.at);
    let mut out: Vec<Sample> = Vec::with_capacity(series.samples.len());
    for s in series.samples.drain(..) {
        if out.last().is_some_and(|p| p.at == s.at) {
            drops.duplicates += 1;
        } else if !window.contains(&s.at) {
            drops.out_of_window += 1;
        } else if !kind.accepts(s.value) {
            drops.out_of_bounds += 1;
        } else {
            out.push(s);
        }
    }
    series.samples = out;
}

/// Retains records passing `keep`, counting each rejection reason.
fn retain_counted<T>(
    items: &mut Vec<T>,
    drops: &mut StreamDrops,
    messages: &mut Vec<String>,
    mut check: impl FnMut(&T) -> Result<(), Drop>,
) {
    items.retain(|item| match check(item) {
        Ok(()) => true,
        Err(Drop::Duplicate) => {
            drops.duplicates += 1;
            false
        }
        Err(Drop::Window) => {
            drops.out_of_window += 1;
            false
        }
        Err(Drop::Invalid(msg)) => {
            drops.invalid += 1;
            messages.push(msg);
            false
        }
    });
}

enum Drop {
    Duplicate,
    Window,
    Invalid(String),
}

/// Sorts, de-duplicates, window-filters and bound-checks every stream.
///
/// Cleaning is lossy and reported, never fatal. The function is idempotent.
pub fn standardize_bundle(mut raw: SubjectBundle) -> (SubjectBundle, CleaningReport) {
    let window = Window::for_meta(&raw.meta);
    let mut report = CleaningReport {
        subject_id: raw.meta.subject_id.clone(),
        ..Default::default()
    };
    let msgs = &mut report.messages;

    clean_series(&mut raw.glucose, window, &mut report.glucose);
    clean_series(&mut raw.hr, window, &mut report.hr);

    raw.daily.sort_by_key(|r| r.date);
    let mut seen = HashSet::new();
    retain_counted(&mut raw.daily, &mut report.daily, msgs, |r| {
        if !seen.insert(r.date) {
            Err(Drop::Duplicate)
        } else if !window.contains_date(r.date) {
            Err(Drop::Window)
        } else {
            r.validate().map_err(|e| Drop::Invalid(e.to_string()))
        }
    });

    raw.stress.sort_by_key(|r| r.date);
    let mut seen = HashSet::new();
    retain_counted(&mut raw.stress, &mut report.stress, msgs, |r| {
        if !seen.insert(r.date) {
            Err(Drop::Duplicate)
        } else if !window.contains_date(r.date) {
            Err(Drop::Window)
        } else {
            r.validate().map_err(|e| Drop::Invalid(e.to_string()))
        }
    });

    raw.exercises.sort_by_key(|e| e.start);
    let mut seen = HashSet::new();
    retain_counted(&mut raw.exercises, &mut report.exercises, msgs, |e| {
        if !seen.insert(e.start) {
            Err(Drop::Duplicate)
        } else if !window.contains(&e.start) {
            Err(Drop::Window)
        } else if !(e.duration_min > 0.0) {
            Err(Drop::Invalid(format!("exercise at {} has no duration", e.start)))
        } else if e.avg_hr.is_some_and(|h| !SeriesKind::Hr.accepts(h)) {
            Err(Drop::Invalid(format!("exercise at {} has impossible HR", e.start)))
        } else {
            Ok(())
        }
    });

    raw.sleeps.sort_by_key(|s| s.start);
    let mut seen = HashSet::new();
    retain_counted(&mut raw.sleeps, &mut report.sleeps, msgs, |s| {
        if !seen.insert(s.start) {
            Err(Drop::Duplicate)
        } else if !window.contains(&s.start) || !window.contains(&s.end) {
            Err(Drop::Window)
        } else {
            s.validate().map_err(|e| Drop::Invalid(e.to_string()))
        }
    });

    raw.eda.sort_by_key(|s| s.start);
    let mut seen = HashSet::new();
    retain_counted(&mut raw.eda, &mut report.eda, msgs, |s| {
        if !seen.insert(s.start) {
            Err(Drop::Duplicate)
        } else if !window.contains(&s.start) {
            Err(Drop::Window)
        } else {
            s.validate().map_err(|e| Drop::Invalid(e.to_string()))
        }
    });

    raw.ecg.sort_by_key(|s| s.start);
    let mut seen = HashSet::new();
    retain_counted(&mut raw.ecg, &mut report.ecg, msgs, |s| {
        if !seen.insert(s.start) {
            Err(Drop::Duplicate)
        } else if !window.contains(&s.start) {
            Err(Drop::Window)
        } else if !SeriesKind::Hr.accepts(s.session_hr) {
            Err(Drop::Invalid(format!("ECG session {} has impossible HR", s.session_id)))
        } else {
            s.validate().map_err(|e| Drop::Invalid(e.to_string()))
        }
    });

    (raw, report)
}

/// Relative weight change at which a subject counts as having lost weight.
pub const WEIGHT_LOSS_THRESHOLD: f64 = 0.02;

/// `LostGe2Pct` iff `(initial - final) / initial >= 0.02`, boundary inclusive.
///
/// A 1e-9 slack absorbs rounding so the label does not depend on the unit
/// the weights are expressed in.
pub fn label_subject(meta: &SubjectMeta) -> Label {
    let lost = (meta.initial_weight_kg - meta.final_weight_kg) / meta.initial_weight_kg;
    Label::from_positive(lost >= WEIGHT_LOSS_THRESHOLD - 1e-9)
}
