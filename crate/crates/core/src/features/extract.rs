//! Dataset extractors producing the 284 raw feature values.

use chrono::{Datelike, Duration, NaiveDate, Timelike, Weekday};

use super::matrix::FeatureVector;
use super::registry::Dataset;
use super::stats::{
    descriptive_stats, estimated_hba1c, glucose_band_fractions, glucose_cv, mean_std,
    partition_by_daypart,
};
use crate::ingest::{SleepEpisode, SleepStage, SubjectBundle, Timestamp};
use crate::numeric;

/// Minutes either side of the subject's median that still count as regular.
pub const REGULAR_TOLERANCE_MIN: f64 = 30.0;
/// Share of REM in asleep time above which a night counts as restful.
pub const RESTFUL_REM_SHARE: f64 = 0.25;
/// Daily minutes needed for an activity level to count that day.
pub const ACTIVE_DAY_MIN: f64 = 10.0;
pub const LAST_WEEK_DAYS: i64 = 7;

fn pct(hits: usize, total: usize) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        100.0 * hits as f64 / total as f64
    }
}

fn opt_mean(xs: &[f64]) -> f64 {
    numeric::mean(xs).unwrap_or(f64::NAN)
}

fn collect<T>(items: &[T], f: impl Fn(&T) -> Option<f64>) -> Vec<f64> {
    items.iter().filter_map(f).filter(|v| v.is_finite()).collect()
}

pub fn extract_ds4(bundle: &SubjectBundle) -> Vec<f64> {
    let parts = partition_by_daypart(&bundle.glucose.samples);
    let mut out = Vec::with_capacity(Dataset::Ds4.len());
    let stats: Vec<[f64; 6]> = parts.iter().map(|p| descriptive_stats(p)).collect();
    for k in 0..6 {
        out.extend(stats.iter().map(|s| s[k]));
    }
    let bands: Vec<[f64; 5]> = parts.iter().map(|p| glucose_band_fractions(p)).collect();
    for k in 0..5 {
        out.extend(bands.iter().map(|b| b[k]));
    }
    out.extend(
        stats
            .iter()
            .map(|s| estimated_hba1c(s[0]).unwrap_or(f64::NAN)),
    );
    out.extend(parts.iter().map(|p| glucose_cv(p).unwrap_or(f64::NAN)));
    debug_assert_eq!(out.len(), Dataset::Ds4.len());
    out
}

/// Per-session waveform slopes in mV/s.
pub fn ecg_slopes(waveform: &[crate::ingest::EcgSample]) -> Vec<f64> {
    waveform
        .windows(2)
        .map(|w| (w[1].mv - w[0].mv) / (w[1].t_s - w[0].t_s))
        .collect()
}

pub fn extract_ds6(bundle: &SubjectBundle) -> Vec<f64> {
    let parts = partition_by_daypart(&bundle.hr.samples);
    let mut out = Vec::with_capacity(Dataset::Ds6.len());
    let stats: Vec<[f64; 6]> = parts.iter().map(|p| descriptive_stats(p)).collect();
    for k in 0..6 {
        out.extend(stats.iter().map(|s| s[k]));
    }
    out.extend(mean_std(&collect(&bundle.daily, |d| d.resting_hr)));
    out.extend(mean_std(&collect(&bundle.exercises, |e| e.avg_hr)));
    out.extend(mean_std(&collect(&bundle.sleeps, |s| s.nonrem_hr)));
    out.extend(mean_std(&collect(&bundle.sleeps, |s| s.nightly_rmssd)));
    out.extend(mean_std(&collect(&bundle.eda, |s| s.hr_mean())));
    out.extend(mean_std(&collect(&bundle.eda, |s| s.hr_begin())));
    out.extend(mean_std(&collect(&bundle.eda, |s| s.hr_end())));
    out.extend(mean_std(&collect(&bundle.eda, |s| s.hrv_baseline_ms)));

    let mut slope_means = Vec::new();
    let mut slope_stds = Vec::new();
    for session in &bundle.ecg {
        let slopes = ecg_slopes(&session.waveform);
        let [m, s] = mean_std(&slopes);
        if m.is_finite() {
            slope_means.push(m);
            slope_stds.push(s);
        }
    }
    out.extend(descriptive_stats(&slope_means));
    out.extend(descriptive_stats(&slope_stds));
    debug_assert_eq!(out.len(), Dataset::Ds6.len());
    out
}

pub fn extract_ds7(bundle: &SubjectBundle) -> Vec<f64> {
    let days = &bundle.daily;
    let mut out = Vec::with_capacity(Dataset::Ds7.len());
    let field = |f: fn(&crate::ingest::DailyActivityRecord) -> f64| -> Vec<f64> {
        days.iter().map(f).collect()
    };
    out.extend(mean_std(&field(|d| d.calories)));
    out.extend(mean_std(&field(|d| d.steps)));
    out.extend(mean_std(&field(|d| d.distance_km)));

    let durations: Vec<f64> = bundle.exercises.iter().map(|e| e.duration_min).collect();
    if days.is_empty() && bundle.exercises.is_empty() {
        out.push(f64::NAN);
    } else {
        out.push(bundle.exercises.len() as f64);
    }
    out.push(opt_mean(&durations));

    let zones = [
        field(|d| d.fat_burn_min),
        field(|d| d.cardio_min),
        field(|d| d.peak_min),
    ];
    out.extend(zones.iter().map(|z| mean_std(z)[0]));
    out.extend(zones.iter().map(|z| mean_std(z)[1]));
    out.extend(mean_std(&field(|d| d.sedentary_min)));
    let levels = [
        field(|d| d.lightly_min),
        field(|d| d.moderately_min),
        field(|d| d.very_min),
    ];
    out.extend(levels.iter().map(|z| mean_std(z)[0]));
    out.extend(levels.iter().map(|z| mean_std(z)[1]));
    out.extend(mean_std(&field(|d| d.below_zone1_min)));
    let hr_zones = [
        field(|d| d.zone1_min),
        field(|d| d.zone2_min),
        field(|d| d.zone3_min),
    ];
    out.extend(hr_zones.iter().map(|z| mean_std(z)[0]));
    out.extend(hr_zones.iter().map(|z| mean_std(z)[1]));
    out.extend(mean_std(&collect(days, |d| d.vo2max)));
    let active_pct = |xs: &[f64]| pct(xs.iter().filter(|&&m| m >= ACTIVE_DAY_MIN).count(), xs.len());
    out.extend(levels.iter().map(|l| active_pct(l)));
    out.push(opt_mean(&field(|d| d.mvpa_min())));

    let last_start = bundle.meta.intervention_end - Duration::days(LAST_WEEK_DAYS - 1);
    let last: Vec<_> = days
        .iter()
        .filter(|d| d.date >= last_start && d.date <= bundle.meta.intervention_end)
        .collect();
    let last_field = |f: fn(&crate::ingest::DailyActivityRecord) -> f64| -> Vec<f64> {
        last.iter().map(|d| f(d)).collect()
    };
    out.push(opt_mean(&last_field(|d| d.sedentary_min)));
    let last_levels = [
        last_field(|d| d.lightly_min),
        last_field(|d| d.moderately_min),
        last_field(|d| d.very_min),
    ];
    out.extend(last_levels.iter().map(|l| opt_mean(l)));
    out.extend(last_levels.iter().map(|l| active_pct(l)));
    out.push(opt_mean(&last_field(|d| d.mvpa_min())));
    debug_assert_eq!(out.len(), Dataset::Ds7.len());
    out
}

fn clock_minutes(t: &Timestamp) -> f64 {
    t.hour() as f64 * 60.0 + t.minute() as f64 + t.second() as f64 / 60.0
}

/// Bedtime as minutes after 18:00, in `[0, 1440)`.
pub fn bedtime_minutes(start: &Timestamp) -> f64 {
    (clock_minutes(start) - 18.0 * 60.0).rem_euclid(1440.0)
}

/// Wake time as minutes after midnight.
pub fn wake_minutes(end: &Timestamp) -> f64 {
    clock_minutes(end)
}

pub fn wake_date(episode: &SleepEpisode) -> NaiveDate {
    episode.end.date_naive()
}

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// `[total, weekdays, weekend]` membership of a night.
fn splits_of(date: NaiveDate) -> [bool; 3] {
    let weekend = is_weekend(date);
    [true, !weekend, weekend]
}

struct Night<'a> {
    ep: &'a SleepEpisode,
    split: [bool; 3],
    bed: f64,
    wake: f64,
}

fn split_values(nights: &[Night<'_>], f: impl Fn(&Night<'_>) -> Option<f64>) -> [Vec<f64>; 3] {
    let mut out: [Vec<f64>; 3] = Default::default();
    for n in nights {
        if let Some(v) = f(n).filter(|v| v.is_finite()) {
            for k in 0..3 {
                if n.split[k] {
                    out[k].push(v);
                }
            }
        }
    }
    out
}

/// Percent of nights per split satisfying `pred`.
fn split_pct(nights: &[Night<'_>], pred: impl Fn(&Night<'_>) -> bool) -> [f64; 3] {
    let mut hits = [0usize; 3];
    let mut total = [0usize; 3];
    for n in nights {
        let hit = pred(n);
        for k in 0..3 {
            if n.split[k] {
                total[k] += 1;
                hits[k] += hit as usize;
            }
        }
    }
    [0, 1, 2].map(|k| pct(hits[k], total[k]))
}

pub fn extract_ds8(bundle: &SubjectBundle) -> Vec<f64> {
    let mut eps = bundle.sleeps.clone();
    eps.sort_by_key(|s| s.start);
    let mut out = Vec::with_capacity(Dataset::Ds8.len());

    out.extend(mean_std(&collect(&eps, |s| s.spo2_avg)));
    out.extend(mean_std(&collect(&eps, |s| s.spo2_lower)));
    out.extend(mean_std(&collect(&eps, |s| s.spo2_upper)));

    let asleep = mean_std(&collect(&eps, |s| Some(s.asleep_min)));
    let awake = mean_std(&collect(&eps, |s| Some(s.awake_min)));
    out.extend([asleep[0], awake[0], asleep[1], awake[1]]);

    let stage_minutes: [Vec<f64>; 4] = [
        collect(&eps, |s| Some(s.span_min())),
        collect(&eps, |s| Some(s.deep_min)),
        collect(&eps, |s| Some(s.light_min)),
        collect(&eps, |s| Some(s.rem_min)),
    ];
    out.extend(stage_minutes.iter().map(|v| mean_std(v)[0]));
    out.extend(stage_minutes.iter().map(|v| mean_std(v)[1]));

    type Pick = fn(&crate::ingest::BreathingRate) -> Option<f64>;
    let picks: [Pick; 3] = [|b| b.mean, |b| b.std, |b| b.snr];
    for pick in picks {
        let per_stage: Vec<[f64; 2]> = SleepStage::ALL
            .iter()
            .map(|&st| mean_std(&collect(&eps, |s| pick(s.breathing.stage(st)))))
            .collect();
        out.extend(per_stage.iter().map(|v| v[0]));
        out.extend(per_stage.iter().map(|v| v[1]));
    }

    out.extend(mean_std(&collect(&eps, |s| s.nightly_temp_delta)));
    out.extend(mean_std(&collect(&eps, |s| s.scores.composition)));
    out.extend(mean_std(&collect(&eps, |s| s.scores.revitalization)));
    out.extend(mean_std(&collect(&eps, |s| s.scores.duration)));
    out.extend(mean_std(&collect(&eps, |s| s.restlessness)));

    let nights: Vec<Night<'_>> = eps
        .iter()
        .map(|ep| Night {
            ep,
            split: splits_of(wake_date(ep)),
            bed: bedtime_minutes(&ep.start),
            wake: wake_minutes(&ep.end),
        })
        .collect();
    let mean3 = |v: [Vec<f64>; 3]| v.map(|x| opt_mean(&x));

    out.extend(mean3(split_values(&nights, |n| n.ep.scores.overall)));
    out.push(mean_std(&collect(&eps, |s| s.scores.overall))[1]);
    out.extend(mean3(split_values(&nights, |n| Some(n.ep.efficiency))));
    out.extend(mean3(split_values(&nights, |n| Some(n.ep.asleep_min)))[1..].iter().copied());
    out.extend(mean3(split_values(&nights, |n| Some(n.bed))));
    out.extend(mean3(split_values(&nights, |n| Some(n.wake))));
    out.extend(mean3(split_values(&nights, |n| {
        Some(n.ep.awakenings as f64)
    })));

    let wakes: Vec<f64> = nights.iter().map(|n| n.wake).collect();
    let beds: Vec<f64> = nights.iter().map(|n| n.bed).collect();
    let med_wake = numeric::median(&wakes).unwrap_or(f64::NAN);
    let med_bed = numeric::median(&beds).unwrap_or(f64::NAN);
    let early_by = |n: &Night<'_>| (med_wake - REGULAR_TOLERANCE_MIN) - n.wake;
    let late_by = |n: &Night<'_>| n.wake - (med_wake + REGULAR_TOLERANCE_MIN);

    // Mean exceedance over irregular nights of the split, 0 when none.
    let deviation = |by: &dyn Fn(&Night<'_>) -> f64| -> [f64; 3] {
        let mut sums: [Vec<f64>; 3] = Default::default();
        let mut seen = [false; 3];
        for n in &nights {
            let d = by(n);
            for k in 0..3 {
                if n.split[k] {
                    seen[k] = true;
                    if d > 0.0 {
                        sums[k].push(d);
                    }
                }
            }
        }
        [0, 1, 2].map(|k| {
            if !seen[k] {
                f64::NAN
            } else {
                numeric::mean(&sums[k]).unwrap_or(0.0)
            }
        })
    };
    out.extend(deviation(&early_by));
    out.extend(deviation(&late_by));

    out.extend(split_pct(&nights, |n| {
        (n.wake - med_wake).abs() <= REGULAR_TOLERANCE_MIN
    }));
    out.extend(split_pct(&nights, |n| {
        (n.bed - med_bed).abs() <= REGULAR_TOLERANCE_MIN
    }));
    out.extend(split_pct(&nights, |n| {
        n.ep.asleep_min > 0.0 && n.ep.rem_min / n.ep.asleep_min > RESTFUL_REM_SHARE
    }));
    out.extend(split_pct(&nights, |n| early_by(n) > 0.0));
    out.extend(split_pct(&nights, |n| late_by(n) > 0.0));

    // Consecutive pairs with restlessness on both nights, filed under the
    // later night's split.
    let mut better = [0usize; 3];
    let mut worse = [0usize; 3];
    let mut pairs = [0usize; 3];
    for w in nights.windows(2) {
        if let (Some(prev), Some(cur)) = (w[0].ep.restlessness, w[1].ep.restlessness) {
            for k in 0..3 {
                if w[1].split[k] {
                    pairs[k] += 1;
                    better[k] += (cur < prev) as usize;
                    worse[k] += (cur > prev) as usize;
                }
            }
        }
    }
    out.extend([0, 1, 2].map(|k| pct(better[k], pairs[k])));
    out.extend([0, 1, 2].map(|k| pct(worse[k], pairs[k])));
    debug_assert_eq!(out.len(), Dataset::Ds8.len());
    out
}

pub fn extract_ds9(bundle: &SubjectBundle) -> Vec<f64> {
    let st = &bundle.stress;
    let mut out = Vec::with_capacity(Dataset::Ds9.len());
    out.extend(mean_std(&collect(st, |r| Some(r.stress_score))));
    out.extend(mean_std(&collect(st, |r| Some(r.sleep_points))));
    out.extend(mean_std(&collect(st, |r| Some(r.responsiveness_points))));
    out.extend(mean_std(&collect(st, |r| Some(r.exertion_points))));
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for session in &bundle.eda {
        let [m, s] = mean_std(&session.scl());
        if m.is_finite() {
            means.push(m);
            stds.push(s);
        }
    }
    out.extend(descriptive_stats(&means));
    out.extend(descriptive_stats(&stds));
    debug_assert_eq!(out.len(), Dataset::Ds9.len());
    out
}

pub fn extract_dataset(bundle: &SubjectBundle, dataset: Dataset) -> Vec<f64> {
    match dataset {
        Dataset::Ds4 => extract_ds4(bundle),
        Dataset::Ds6 => extract_ds6(bundle),
        Dataset::Ds7 => extract_ds7(bundle),
        Dataset::Ds8 => extract_ds8(bundle),
        Dataset::Ds9 => extract_ds9(bundle),
    }
}

/// Full 284-value vector for one standardized subject.
pub fn extract_all(bundle: &SubjectBundle) -> FeatureVector {
    let mut values = Vec::with_capacity(super::FEATURE_COUNT);
    for ds in Dataset::ALL {
        values.extend(extract_dataset(bundle, ds));
    }
    FeatureVector::new(bundle.meta.subject_id.clone(), values)
}
