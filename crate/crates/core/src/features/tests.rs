use approx::assert_abs_diff_eq;
use chrono::{DateTime, Duration, NaiveDate};
use proptest::prelude::*;

use super::*;
use crate::ingest::*;

fn ts(s: &str) -> Timestamp {
    DateTime::parse_from_rfc3339(s).unwrap()
}

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn bundle() -> SubjectBundle {
    SubjectBundle::empty(SubjectMeta {
        subject_id: "S001".into(),
        age: 50,
        sex: Sex::Male,
        height_cm: 175.0,
        initial_weight_kg: 90.0,
        final_weight_kg: 87.0,
        intervention_start: date("2022-03-01"),
        intervention_end: date("2022-03-14"),
    })
}

fn f(v: &FeatureVector, id: usize) -> f64 {
    v.values[id - 1]
}

fn glucose_day(b: &mut SubjectBundle, value: impl Fn(i64) -> f64, hours: std::ops::Range<i64>) {
    let t0 = ts("2022-03-02T00:00:00+01:00");
    for m in (hours.start * 60..hours.end * 60).step_by(15) {
        b.glucose.samples.push(Sample::new(t0 + Duration::minutes(m), value(m)));
    }
}

fn daily(d: &str, lightly: f64, moderately: f64, very: f64) -> DailyActivityRecord {
    DailyActivityRecord {
        date: date(d),
        calories: 2000.0,
        steps: 8000.0,
        distance_km: 6.0,
        sedentary_min: 600.0,
        lightly_min: lightly,
        moderately_min: moderately,
        very_min: very,
        fat_burn_min: 30.0,
        cardio_min: 5.0,
        peak_min: 0.0,
        below_zone1_min: 900.0,
        zone1_min: 30.0,
        zone2_min: 5.0,
        zone3_min: 0.0,
        vo2max: Some(38.0),
        resting_hr: Some(62.0),
    }
}

fn night(start: &str, end: &str, asleep: f64, rem: f64) -> SleepEpisode {
    SleepEpisode {
        start: ts(start),
        end: ts(end),
        asleep_min: asleep,
        awake_min: 40.0,
        deep_min: 60.0,
        light_min: asleep - 60.0 - rem,
        rem_min: rem,
        efficiency: 90.0,
        awakenings: 3,
        spo2_avg: Some(95.0),
        spo2_lower: Some(92.0),
        spo2_upper: Some(98.0),
        nightly_temp_delta: Some(0.1),
        breathing: StageBreathing::default(),
        restlessness: Some(0.08),
        scores: SleepScores {
            overall: Some(80.0),
            ..Default::default()
        },
        nightly_rmssd: Some(35.0),
        nonrem_hr: Some(58.0),
    }
}

#[test]
fn block_lengths() {
    let b = bundle();
    let lens: Vec<usize> = Dataset::ALL
        .iter()
        .map(|&d| extract_dataset(&b, d).len())
        .collect();
    assert_eq!(lens, vec![65, 58, 44, 97, 20]);
    assert_eq!(extract_all(&b).values.len(), 284);
}

#[test]
fn empty_bundle_is_all_missing() {
    let v = extract_all(&bundle());
    assert_eq!(v.missing_count(), 284);
    assert!(v.values.iter().all(|x| x.is_nan()));
}

#[test]
fn constant_glucose_day() {
    let mut b = bundle();
    glucose_day(&mut b, |_| 100.0, 0..24);
    let v = extract_all(&b);
    assert_eq!(f(&v, 1), 100.0);
    assert_eq!(f(&v, 6), 0.0);
    assert_eq!(f(&v, 41), 100.0);
    // (100 + 46.7) / 28.7 at 50 digits
    assert_abs_diff_eq!(f(&v, 56), 5.111498257839721, epsilon = 1e-12);
    assert_eq!(f(&v, 61), 0.0);
    assert_eq!(v.missing[..65].iter().filter(|m| **m).count(), 0);
}

#[test]
fn no_night_glucose_leaves_only_night_missing() {
    let mut b = bundle();
    glucose_day(&mut b, |m| 90.0 + (m % 60) as f64, 6..24);
    let v = extract_all(&b);
    let reg = FeatureRegistry::global();
    for id in 1..=65 {
        let e = reg.entry(FeatureId::new(id).unwrap());
        assert_eq!(
            v.missing[id - 1],
            e.daypart == Some(DayPart::Night),
            "feature {id}"
        );
    }
}

#[test]
fn std_of_glucose_in_afternoon_is_feature_8() {
    let mut b = bundle();
    glucose_day(&mut b, |m| if m >= 12 * 60 && m < 18 * 60 && m % 30 == 0 { 120.0 } else { 100.0 }, 0..24);
    let v = extract_all(&b);
    assert_abs_diff_eq!(f(&v, 8), 10.0, epsilon = 1e-9);
    assert_eq!(f(&v, 7), 0.0);
    assert_eq!(f(&v, 9), 0.0);
}

#[test]
fn linear_ecg_slope() {
    let mut b = bundle();
    b.ecg.push(EcgSession {
        session_id: "e1".into(),
        start: ts("2022-03-03T10:00:00+01:00"),
        session_hr: 70.0,
        waveform: (0..500)
            .map(|i| {
                let t = i as f64 / 250.0;
                EcgSample { t_s: t, mv: 2.0 * t }
            })
            .collect(),
    });
    let v = extract_all(&b);
    assert_abs_diff_eq!(f(&v, 112), 2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(f(&v, 113), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f(&v, 118), 0.0, epsilon = 1e-9);
}

#[test]
fn no_eda_sessions_leave_eda_features_missing() {
    let mut b = bundle();
    b.stress.push(StressDailyRecord {
        date: date("2022-03-02"),
        stress_score: 78.0,
        sleep_points: 25.0,
        responsiveness_points: 23.0,
        exertion_points: 30.0,
    });
    glucose_day(&mut b, |_| 100.0, 0..24);
    let v = extract_all(&b);
    assert!(v.missing[103..111].iter().all(|m| *m));
    assert!(v.missing[272..284].iter().all(|m| *m));
    assert_eq!(f(&v, 265), 78.0);
    assert_eq!(f(&v, 266), 0.0);
}

#[test]
fn eda_features_from_sessions() {
    let mut b = bundle();
    for (k, base) in [2.0, 4.0].iter().enumerate() {
        b.eda.push(EdaSession {
            session_id: format!("s{k}"),
            start: ts("2022-03-03T10:00:00+01:00") + Duration::days(k as i64),
            hrv_baseline_ms: Some(40.0),
            samples: (0..120)
                .map(|i| EdaSample {
                    t_s: i as f64,
                    scl_us: base + if i % 2 == 0 { 0.5 } else { -0.5 },
                    hr_bpm: Some(if i < 30 { 80.0 } else if i >= 90 { 70.0 } else { 75.0 }),
                })
                .collect(),
        });
    }
    let v = extract_all(&b);
    assert_eq!(f(&v, 104), 75.0);
    assert_eq!(f(&v, 106), 80.0);
    assert_eq!(f(&v, 108), 70.0);
    assert_eq!(f(&v, 110), 40.0);
    assert_eq!(f(&v, 273), 3.0);
    assert_eq!(f(&v, 274), 1.0);
    assert_eq!(f(&v, 278), 2.0);
    assert_eq!(f(&v, 279), 0.5);
    assert_eq!(f(&v, 280), 0.0);
}

#[test]
fn activity_percent_and_mvpa() {
    let mut b = bundle();
    for d in 1..=14 {
        b.daily
            .push(daily(&format!("2022-03-{d:02}"), 10.0 + d as f64, 20.0, 10.0));
    }
    let v = extract_all(&b);
    assert_eq!(f(&v, 156), 100.0);
    assert_eq!(f(&v, 157), 100.0);
    assert_eq!(f(&v, 158), 100.0);
    assert_eq!(f(&v, 159), 30.0);
    assert_eq!(f(&v, 167), 30.0);
    // last week = days 8..=14, lightly 18..=24
    assert_eq!(f(&v, 161), 21.0);
    assert_eq!(f(&v, 140), 17.5);
    assert_eq!(f(&v, 130), 0.0);
    assert!(v.missing[130]);
}

#[test]
fn rem_share_threshold() {
    let mut b = bundle();
    b.sleeps.push(night(
        "2022-03-01T23:00:00+01:00",
        "2022-03-02T07:00:00+01:00",
        400.0,
        120.0,
    ));
    let v = extract_all(&b);
    assert_eq!(f(&v, 250), 100.0);
    assert_eq!(f(&v, 251), 100.0);
    assert!(v.missing[251]);
    assert_eq!(f(&v, 178), 480.0);
    assert_eq!(f(&v, 174), 400.0);
}

#[test]
fn identical_wake_times_are_regular() {
    let mut b = bundle();
    for d in 1..=10 {
        let s = format!("2022-03-{d:02}T23:15:00+01:00");
        let e = format!("2022-03-{:02}T07:30:00+01:00", d + 1);
        b.sleeps.push(night(&s, &e, 420.0, 80.0));
    }
    let v = extract_all(&b);
    for id in 244..=249 {
        assert_eq!(f(&v, id), 100.0, "feature {id}");
    }
    for id in 238..=243 {
        assert_eq!(f(&v, id), 0.0, "feature {id}");
    }
    assert_eq!(f(&v, 232), 450.0);
    assert_eq!(f(&v, 229), 315.0);
    for id in 253..=258 {
        assert_eq!(f(&v, id), 0.0, "feature {id}");
    }
}

#[test]
fn early_and_late_waking() {
    let mut b = bundle();
    // Wed..Sat wake dates: 07:00, 07:00, 06:00, 08:00 -> median 07:00
    let wakes = [("02", "07:00"), ("03", "07:00"), ("04", "06:00"), ("05", "08:00")];
    for (i, (d, w)) in wakes.iter().enumerate() {
        let s = format!("2022-03-{:02}T23:00:00+01:00", i + 1);
        let e = format!("2022-03-{d}T{w}:00+01:00");
        b.sleeps.push(night(&s, &e, 400.0, 80.0));
    }
    let v = extract_all(&b);
    assert_eq!(f(&v, 238), 30.0);
    assert_eq!(f(&v, 241), 30.0);
    assert_eq!(f(&v, 253), 25.0);
    assert_eq!(f(&v, 256), 25.0);
    // 2022-03-05 is a Saturday
    assert_eq!(f(&v, 258), 100.0);
    assert_eq!(f(&v, 243), 30.0);
    assert_eq!(f(&v, 242), 0.0);
    assert_eq!(f(&v, 244), 50.0);
}

#[test]
fn restlessness_variations() {
    let mut b = bundle();
    for (i, r) in [0.10, 0.08, 0.09, 0.09].iter().enumerate() {
        let s = format!("2022-03-{:02}T23:00:00+01:00", i + 1);
        let e = format!("2022-03-{:02}T07:00:00+01:00", i + 2);
        let mut n = night(&s, &e, 400.0, 80.0);
        n.restlessness = Some(*r);
        b.sleeps.push(n);
    }
    let v = extract_all(&b);
    assert_abs_diff_eq!(f(&v, 259), 100.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f(&v, 262), 100.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn table_names_resolve() {
    let r = FeatureRegistry::global();
    for (name, id) in [
        ("std of glucose in the afternoon", 8),
        ("std of glucose in the evening", 9),
        ("% time in high values all day", 36),
        ("% time in high values in the morning", 37),
        ("HB1Ac avg all day", 56),
        ("HB1Ac avg in the afternoon", 58),
        ("glucose variability in the morning", 62),
        ("glucose variability in the afternoon", 63),
        ("avg RMSSD during sleep", 102),
        ("std of calories", 125),
        ("std of steps", 127),
        ("std of distance", 129),
        ("avg sedentary minutes last week", 160),
        ("avg minutes below default zone 1", 146),
        ("avg MVPA minutes last week", 167),
        ("std of oxygen saturation during sleep", 169),
        ("avg upper bound oxygen saturation during sleep", 172),
        ("avg asleep duration", 174),
        ("std of std of REM sleep breathing rate", 201),
        ("avg revitalization score", 214),
        ("std of revitalization score", 215),
        ("avg total overall sleep score", 220),
        ("avg weekdays overall sleep score", 221),
        ("avg total sleep end time", 232),
        ("avg weekdays sleep end time", 233),
    ] {
        assert_eq!(r.lookup(name).map(FeatureId::get), Some(id), "{name}");
    }
}

#[test]
fn features_csv_round_trip() {
    let mut b = bundle();
    glucose_day(&mut b, |m| 95.0 + (m % 45) as f64 / 3.0, 0..20);
    let m = CohortMatrix::new(vec![extract_all(&b)], vec![Label::LostGe2Pct]).unwrap();
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join(FEATURES_FILE);
    write_features_csv(&p, &m).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("subject_id,label,f001,f002,"));
    let back = read_features_csv(&p).unwrap();
    assert_eq!(back.labels, m.labels);
    assert_eq!(back.rows[0].missing, m.rows[0].missing);
    for (a, b) in back.rows[0].values.iter().zip(&m.rows[0].values) {
        assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
    }
    write_registry_json(&d.path().join(REGISTRY_FILE)).unwrap();
}

proptest! {
    #[test]
    fn glucose_shift_moves_feature_1_only(c in -20.0f64..20.0, amp in 0.0f64..40.0) {
        let mut a = bundle();
        glucose_day(&mut a, |m| 110.0 + amp * ((m as f64) / 90.0).sin(), 0..24);
        let mut shifted = a.clone();
        for s in &mut shifted.glucose.samples {
            s.value += c;
        }
        let va = extract_all(&a);
        let vb = extract_all(&shifted);
        prop_assert!((f(&vb, 1) - f(&va, 1) - c).abs() < 1e-9);
        prop_assert!((f(&vb, 6) - f(&va, 6)).abs() < 1e-7);
    }

    #[test]
    fn extraction_ignores_other_subjects(n_other in 0usize..3) {
        let mut a = bundle();
        glucose_day(&mut a, |m| 100.0 + (m % 7) as f64, 0..24);
        let mut cohort = vec![a.clone()];
        for k in 0..n_other {
            let mut o = bundle();
            o.meta.subject_id = format!("X{k}");
            glucose_day(&mut o, |m| 150.0 + (m % 11) as f64, 0..12);
            cohort.push(o);
        }
        cohort.reverse();
        let labels = vec![Label::LostLt2Pct; cohort.len()];
        let m = CohortMatrix::from_bundles(&cohort, &labels).unwrap();
        let row = m.rows.iter().find(|r| r.subject_id == "S001").unwrap();
        let solo = extract_all(&a);
        prop_assert_eq!(row.missing.clone(), solo.missing.clone());
        for (x, y) in row.values.iter().zip(&solo.values) {
            prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }
}
