use std::f64::consts::PI;

use chrono::{Duration, FixedOffset, NaiveDate, NaiveDateTime, TimeZone};
use rand::seq::SliceRandom;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::profile::{CohortSpec, SIGNALS};
use crate::error::Result;
use crate::features::rmssd;
use crate::ingest::*;
use crate::numeric;
use crate::rng::{self, StreamRng};

/// Generated subjects and their labels, in subject order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub bundles: Vec<SubjectBundle>,
    pub labels: Vec<Label>,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }
}

const CGM_STEP_MIN: i64 = 15;
const EDA_SECONDS: usize = 180;
const ECG_HZ: f64 = 128.0;
const ECG_SECONDS: f64 = 30.0;

fn gauss(rng: &mut StreamRng) -> f64 {
    StandardNormal.sample(rng)
}

fn normal(rng: &mut StreamRng, mean: f64, std: f64) -> f64 {
    mean + std * gauss(rng)
}

/// Per-subject draws of every latent signal.
struct Latents(Vec<f64>);

impl Latents {
    fn get(&self, name: &str) -> f64 {
        let i = SIGNALS
            .iter()
            .position(|s| *s == name)
            .expect("known signal");
        self.0[i]
    }
}

struct Clock {
    tz: FixedOffset,
}

impl Clock {
    fn at(&self, date: NaiveDate, minutes: f64) -> Timestamp {
        let secs = (minutes * 60.0).round() as i64;
        let naive: NaiveDateTime = date.and_hms_opt(0, 0, 0).expect("midnight") + Duration::seconds(secs);
        self.tz
            .from_local_datetime(&naive)
            .single()
            .expect("fixed offsets are unambiguous")
    }
}

/// Builds a labelled synthetic cohort. Positives come first.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Cohort> {
    spec.validate()?;
    let bundles: Vec<SubjectBundle> = (0..spec.len())
        .into_par_iter()
        .map(|i| generate_subject(spec, i))
        .collect();
    let labels = bundles.iter().map(|b| label_subject(&b.meta)).collect();
    Ok(Cohort { bundles, labels })
}

fn generate_subject(spec: &CohortSpec, index: usize) -> SubjectBundle {
    let positive = index < spec.n_positive;
    let mut rng = rng::stream(spec.seed, &[index as u64]);
    let latents = Latents(
        SIGNALS
            .iter()
            .map(|name| {
                let e = spec.effects.get(name);
                normal(&mut rng, e.mean_for(positive), e.std)
            })
            .collect(),
    );
    let clock = Clock {
        tz: FixedOffset::east_opt(spec.utc_offset_min * 60).expect("valid offset"),
    };
    let start = spec.start_date + Duration::days((index % 7) as i64);
    let end = start + Duration::days(spec.days as i64 - 1);
    let meta = make_meta(&mut rng, index, positive, &latents, start, end);

    let sub = |k: u64| rng::stream(spec.seed, &[index as u64, k]);
    let dates: Vec<NaiveDate> = start.iter_days().take(spec.days as usize).collect();
    let mut b = SubjectBundle::empty(meta);
    b.glucose = glucose_series(&mut sub(1), &clock, &dates, &latents);
    b.exercises = exercises(&mut sub(3), &clock, &dates, &latents);
    b.hr = hr_series(&mut sub(2), &clock, &dates, &latents, &b.exercises);
    b.daily = daily_records(&mut sub(4), &dates, &latents);
    b.sleeps = sleeps(&mut sub(5), &clock, &dates, &latents);
    b.stress = stress_records(&mut sub(6), &dates, &latents);
    b.eda = eda_sessions(&mut sub(7), &clock, &dates, &latents);
    b.ecg = ecg_sessions(&mut sub(8), &clock, &dates, &latents);
    b
}

fn make_meta(
    rng: &mut StreamRng,
    index: usize,
    positive: bool,
    lat: &Latents,
    start: NaiveDate,
    end: NaiveDate,
) -> SubjectMeta {
    let women = if positive { 0.73 } else { 0.65 };
    let sex = if rng.random::<f64>() < women {
        Sex::Female
    } else {
        Sex::Male
    };
    let initial = (normal(rng, 85.0, 14.0).clamp(50.0, 150.0) * 10.0).round() / 10.0;
    let loss = if positive {
        rng.random_range(0.025..0.08)
    } else {
        rng.random_range(-0.02..0.015)
    };
    let final_kg = (initial * (1.0 - loss) * 10.0).round() / 10.0;
    SubjectMeta {
        subject_id: format!("S{:03}", index + 1),
        age: lat.get("age").round().clamp(18.0, 80.0) as u32,
        sex,
        height_cm: (normal(rng, 166.0, 9.0).clamp(145.0, 200.0) * 10.0).round() / 10.0,
        initial_weight_kg: initial,
        final_weight_kg: final_kg,
        intervention_start: start,
        intervention_end: end,
    }
}

/// Rescales `raw` so its population mean and std are exactly `mean`, `std`.
fn standardize_to(raw: &[f64], mean: f64, std: f64) -> Vec<f64> {
    let m = numeric::mean(raw).unwrap_or(0.0);
    let s = numeric::std_dev(raw).unwrap_or(0.0);
    raw.iter()
        .map(|v| if s > 0.0 { mean + std * (v - m) / s } else { mean })
        .collect()
}

fn meal_bump(minutes_since: f64) -> f64 {
    if !(0.0..=240.0).contains(&minutes_since) {
        return 0.0;
    }
    let x = minutes_since / 45.0;
    x * (1.0 - x).exp()
}

fn glucose_series(rng: &mut StreamRng, clock: &Clock, dates: &[NaiveDate], lat: &Latents) -> TimeSeries {
    let per_day = 1440 / CGM_STEP_MIN;
    let mut raw = Vec::with_capacity(dates.len() * per_day as usize);
    let mut ar = 0.0;
    for _ in dates {
        let meals = [8.0, 14.0, 21.0].map(|h| (h * 60.0 + normal(rng, 0.0, 20.0), rng.random_range(1.0..2.5)));
        for k in 0..per_day {
            let m = (k * CGM_STEP_MIN) as f64;
            ar = 0.85 * ar + 0.5 * gauss(rng);
            let bump: f64 = meals.iter().map(|(at, amp)| amp * meal_bump(m - at)).sum();
            raw.push(ar + 1.5 * bump);
        }
    }
    let mean = lat.get("glucose_mean").clamp(70.0, 200.0);
    let cv = lat.get("glucose_cv").clamp(4.0, 35.0);
    let values = standardize_to(&raw, mean, cv * mean / 100.0);
    let mut series = TimeSeries::new(SeriesKind::Cgm);
    for (i, v) in values.into_iter().enumerate() {
        let day = i / per_day as usize;
        let minute = (i % per_day as usize) as f64 * CGM_STEP_MIN as f64;
        series
            .samples
            .push(Sample::new(clock.at(dates[day], minute), v.clamp(25.0, 600.0)));
    }
    series
}

fn hr_series(
    rng: &mut StreamRng,
    clock: &Clock,
    dates: &[NaiveDate],
    lat: &Latents,
    exercises: &[ExerciseSession],
) -> TimeSeries {
    let mut raw = Vec::with_capacity(dates.len() * 1440);
    let mut ar = 0.0;
    for _ in dates {
        for m in 0..1440 {
            let hour = m as f64 / 60.0;
            let rhythm = -7.0 * (2.0 * PI * (hour - 3.5) / 24.0).cos();
            ar = 0.95 * ar + 1.2 * gauss(rng);
            raw.push(rhythm + ar);
        }
    }
    let base = standardize_to(&raw, 0.0, numeric::std_dev(&raw).unwrap_or(0.0));
    let mean = lat.get("hr_mean").clamp(50.0, 110.0);
    let mut series = TimeSeries::new(SeriesKind::Hr);
    let t0 = clock.at(dates[0], 0.0);
    let mut bumps = vec![0.0; base.len()];
    for ex in exercises {
        let from = (ex.start - t0).num_minutes().max(0) as usize;
        let to = (from + ex.duration_min.round() as usize).min(bumps.len());
        let lift = ex.avg_hr.unwrap_or(mean) - mean;
        for b in &mut bumps[from.min(to)..to] {
            *b = lift;
        }
    }
    for (i, v) in base.iter().enumerate() {
        let day = i / 1440;
        series.samples.push(Sample::new(
            clock.at(dates[day], (i % 1440) as f64),
            (mean + v + bumps[i]).clamp(35.0, 200.0),
        ));
    }
    series
}

fn exercises(rng: &mut StreamRng, clock: &Clock, dates: &[NaiveDate], lat: &Latents) -> Vec<ExerciseSession> {
    let days = dates.len();
    let count = (lat.get("exercise_count").max(0.0) * days as f64 / 14.0).round() as usize;
    let mut slots: Vec<usize> = (0..days * 2).collect();
    slots.shuffle(rng);
    let mut out: Vec<ExerciseSession> = slots
        .into_iter()
        .take(count)
        .map(|slot| {
            let date = dates[slot / 2];
            let base_min: f64 = if slot % 2 == 0 { 7.5 * 60.0 } else { 17.5 * 60.0 };
            let start_min = (base_min + rng.random_range(0.0..90.0)).round();
            ExerciseSession {
                start: clock.at(date, start_min),
                duration_min: normal(rng, lat.get("exercise_duration"), 8.0).clamp(8.0, 150.0).round(),
                avg_hr: Some(normal(rng, lat.get("exercise_hr"), 4.0).clamp(70.0, 180.0)),
            }
        })
        .collect();
    out.sort_by_key(|e| e.start);
    out
}

fn daily_records(rng: &mut StreamRng, dates: &[NaiveDate], lat: &Latents) -> Vec<DailyActivityRecord> {
    let vo2 = normal(rng, 38.0, 5.0).clamp(20.0, 60.0);
    let light_level = normal(rng, 230.0, 50.0).clamp(60.0, 400.0);
    dates
        .iter()
        .map(|&date| {
            let steps = normal(rng, lat.get("steps"), 2000.0).max(300.0).round();
            let mvpa = normal(rng, lat.get("mvpa_minutes"), 20.0).max(0.0);
            let share = rng.random_range(0.4..0.7);
            let moderately = (mvpa * share).round();
            let very = (mvpa - moderately).max(0.0).round();
            let lightly = normal(rng, light_level, 40.0).clamp(5.0, 500.0).round();
            let sedentary = normal(rng, lat.get("sedentary_minutes"), 60.0)
                .clamp(200.0, 1440.0 - lightly - moderately - very)
                .round();
            let fat_burn = (normal(rng, 35.0, 12.0) + 0.3 * mvpa).clamp(0.0, 300.0).round();
            let cardio = (0.4 * very + normal(rng, 2.0, 2.0)).clamp(0.0, 200.0).round();
            let peak = (0.15 * very + normal(rng, 0.0, 1.5)).clamp(0.0, 100.0).round();
            DailyActivityRecord {
                date,
                calories: normal(rng, lat.get("calories"), 180.0).max(1000.0).round(),
                steps,
                distance_km: (steps * 0.00076 * 100.0).round() / 100.0,
                sedentary_min: sedentary,
                lightly_min: lightly,
                moderately_min: moderately,
                very_min: very,
                fat_burn_min: fat_burn,
                cardio_min: cardio,
                peak_min: peak,
                below_zone1_min: (1440.0 - 480.0 - fat_burn - cardio - peak).max(0.0),
                zone1_min: fat_burn,
                zone2_min: cardio,
                zone3_min: peak,
                vo2max: Some((vo2 * 10.0 + normal(rng, 0.0, 2.0)).round() / 10.0),
                resting_hr: Some(normal(rng, lat.get("resting_hr"), 1.5).clamp(35.0, 110.0)),
            }
        })
        .collect()
}

fn breathing(rng: &mut StreamRng, base: f64) -> BreathingRate {
    BreathingRate {
        mean: Some(normal(rng, base, 0.6)),
        std: Some(normal(rng, 1.2, 0.25).abs()),
        snr: Some(normal(rng, 12.0, 2.5).abs()),
    }
}

fn sleeps(rng: &mut StreamRng, clock: &Clock, dates: &[NaiveDate], lat: &Latents) -> Vec<SleepEpisode> {
    let br_base = normal(rng, 15.0, 1.5).clamp(10.0, 22.0);
    let restless = normal(rng, 0.08, 0.02).clamp(0.02, 0.2);
    dates
        .iter()
        .map(|&wake| {
            let span = normal(rng, lat.get("sleep_duration"), 30.0).clamp(200.0, 720.0).round();
            let awake = normal(rng, lat.get("awake_minutes"), 8.0).clamp(5.0, span / 3.0).round();
            let asleep = span - awake;
            let deep = normal(rng, lat.get("deep_minutes"), 8.0).clamp(0.0, asleep * 0.4).round();
            let rem = normal(rng, lat.get("rem_minutes"), 10.0).clamp(0.0, asleep * 0.45).round();
            let light = asleep - deep - rem;
            let end_min = normal(rng, lat.get("sleep_end_time"), 20.0).clamp(240.0, 720.0).round();
            let end = clock.at(wake, end_min);
            let start = end - Duration::minutes(span as i64);
            let nonrem_hr = normal(rng, lat.get("nonrem_hr"), 2.0).clamp(35.0, 110.0);
            let rr_base = 60000.0 / nonrem_hr;
            let mut rr = Vec::with_capacity(300);
            let mut drift = 0.0;
            for _ in 0..300 {
                drift = 0.7 * drift + normal(rng, 0.0, 18.0);
                rr.push(rr_base + drift);
            }
            let spo2 = normal(rng, lat.get("spo2"), 0.5).clamp(85.0, 99.0);
            let score = normal(rng, lat.get("sleep_score"), 3.0).clamp(0.0, 100.0);
            SleepEpisode {
                start,
                end,
                asleep_min: asleep,
                awake_min: awake,
                deep_min: deep,
                light_min: light,
                rem_min: rem,
                efficiency: (100.0 * asleep / span).round(),
                awakenings: rng.random_range(5..25),
                spo2_avg: Some(spo2),
                spo2_lower: Some((spo2 - normal(rng, 3.0, 0.8).abs()).max(70.0)),
                spo2_upper: Some((spo2 + normal(rng, 2.5, 0.6).abs()).min(100.0)),
                nightly_temp_delta: Some(normal(rng, 0.0, 0.3)),
                breathing: StageBreathing {
                    full: breathing(rng, br_base),
                    deep: breathing(rng, br_base - 1.0),
                    light: breathing(rng, br_base),
                    rem: breathing(rng, br_base + 0.8),
                },
                restlessness: Some(normal(rng, restless, 0.015).clamp(0.0, 1.0)),
                scores: SleepScores {
                    overall: Some(score.round()),
                    composition: Some((0.25 * score + normal(rng, 0.0, 1.5)).clamp(0.0, 100.0).round()),
                    revitalization: Some((0.25 * score + normal(rng, 0.0, 1.5)).clamp(0.0, 100.0).round()),
                    duration: Some((0.5 * score + normal(rng, 0.0, 2.0)).clamp(0.0, 100.0).round()),
                },
                nightly_rmssd: rmssd(&rr),
                nonrem_hr: Some(nonrem_hr),
            }
        })
        .collect()
}

fn stress_records(rng: &mut StreamRng, dates: &[NaiveDate], lat: &Latents) -> Vec<StressDailyRecord> {
    dates
        .iter()
        .map(|&date| {
            let sleep = normal(rng, lat.get("sleep_points"), 2.0).clamp(0.0, 40.0).round();
            let resp = normal(rng, lat.get("responsiveness_points"), 1.5).clamp(0.0, 30.0).round();
            let exertion = normal(rng, lat.get("exertion_points"), 1.5).clamp(0.0, 30.0).round();
            StressDailyRecord {
                date,
                stress_score: sleep + resp + exertion,
                sleep_points: sleep,
                responsiveness_points: resp,
                exertion_points: exertion,
            }
        })
        .collect()
}

fn session_days(days: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| (k * days) / count + days / (2 * count)).collect()
}

fn eda_sessions(rng: &mut StreamRng, clock: &Clock, dates: &[NaiveDate], lat: &Latents) -> Vec<EdaSession> {
    let scl_base = normal(rng, 2.5, 0.8).clamp(0.3, 8.0);
    session_days(dates.len(), 3)
        .into_iter()
        .enumerate()
        .map(|(k, day)| {
            let level = (scl_base + normal(rng, 0.0, 0.3)).max(0.2);
            let hr = normal(rng, lat.get("session_hr"), 3.0).clamp(40.0, 150.0);
            let mut drift = 0.0;
            let samples = (0..EDA_SECONDS)
                .map(|i| {
                    drift = 0.9 * drift + normal(rng, 0.0, 0.02);
                    EdaSample {
                        t_s: i as f64,
                        scl_us: (level + 0.2 * (i as f64 / 40.0).sin() + drift).max(0.01),
                        hr_bpm: Some(normal(rng, hr, 2.0)),
                    }
                })
                .collect();
            EdaSession {
                session_id: format!("eda{}", k + 1),
                start: clock.at(dates[day], 10.0 * 60.0 + 7.0 * k as f64),
                hrv_baseline_ms: Some(normal(rng, 45.0, 10.0).clamp(10.0, 150.0)),
                samples,
            }
        })
        .collect()
}

fn ecg_sessions(rng: &mut StreamRng, clock: &Clock, dates: &[NaiveDate], lat: &Latents) -> Vec<EcgSession> {
    session_days(dates.len(), 2)
        .into_iter()
        .enumerate()
        .map(|(k, day)| {
            let hr = normal(rng, lat.get("session_hr"), 2.0).clamp(40.0, 150.0);
            let beat_hz = hr / 60.0;
            let amp = normal(rng, 1.0, 0.1);
            let n = (ECG_HZ * ECG_SECONDS) as usize;
            let waveform = (0..n)
                .map(|i| {
                    let t = i as f64 / ECG_HZ;
                    let phase = (t * beat_hz).fract();
                    let qrs = amp * (-((phase - 0.3) / 0.02).powi(2)).exp();
                    let twave = 0.25 * amp * (-((phase - 0.6) / 0.06).powi(2)).exp();
                    EcgSample {
                        t_s: t,
                        mv: qrs + twave + 0.05 * (2.0 * PI * 0.3 * t).sin() + normal(rng, 0.0, 0.01),
                    }
                })
                .collect();
            EcgSession {
                session_id: format!("ecg{}", k + 1),
                start: clock.at(dates[day], 19.0 * 60.0 + 3.0 * k as f64),
                session_hr: hr,
                waveform,
            }
        })
        .collect()
}

/// Uniform random permutation of `0..n`.
pub fn label_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, &[0x5045_524d]));
    perm
}

/// Shuffles labels across subjects; bundles are left untouched.
pub fn plant_label_permutation(cohort: &Cohort, seed: u64) -> Cohort {
    let perm = label_permutation(cohort.len(), seed);
    Cohort {
        bundles: cohort.bundles.clone(),
        labels: perm.iter().map(|&i| cohort.labels[i]).collect(),
    }
}
