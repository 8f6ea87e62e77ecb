use super::*;
use crate::features::{extract_all, FeatureVector};
use crate::ingest::{standardize_bundle, Label};

fn small(seed: u64) -> CohortSpec {
    CohortSpec {
        n_positive: 4,
        n_negative: 3,
        days: 7,
        seed,
        ..Default::default()
    }
}

#[test]
fn default_spec_sizes() {
    let spec = CohortSpec::default();
    assert_eq!(spec.len(), 93);
    assert_eq!(spec.n_positive, 55);
    assert_eq!(spec.days, 14);
}

#[test]
fn labels_follow_groups() {
    let c = generate_cohort(&small(3)).unwrap();
    let pos: Vec<bool> = c.labels.iter().map(|l| l.is_positive()).collect();
    assert_eq!(pos, vec![true, true, true, true, false, false, false]);
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(generate_cohort(&small(9)).unwrap(), generate_cohort(&small(9)).unwrap());
    assert_ne!(
        generate_cohort(&small(9)).unwrap().bundles[0].glucose,
        generate_cohort(&small(10)).unwrap().bundles[0].glucose
    );
}

#[test]
fn standardize_is_a_no_op_on_generated_bundles() {
    let c = generate_cohort(&small(1)).unwrap();
    for b in &c.bundles {
        let (clean, report) = standardize_bundle(b.clone());
        assert_eq!(report.total_dropped(), 0, "{:?}", report);
        assert_eq!(&clean, b);
    }
}

#[test]
fn generated_bundles_fill_every_block() {
    let c = generate_cohort(&small(2)).unwrap();
    let v = extract_all(&c.bundles[0]);
    let missing: Vec<usize> = (0..284).filter(|&i| v.missing[i]).map(|i| i + 1).collect();
    assert!(missing.is_empty(), "missing features {missing:?}");
}

#[test]
fn stress_score_is_sum_of_points() {
    let c = generate_cohort(&small(4)).unwrap();
    for r in &c.bundles[0].stress {
        assert_eq!(
            r.stress_score,
            r.sleep_points + r.responsiveness_points + r.exertion_points
        );
    }
}

#[test]
fn realized_glucose_cv_matches_the_calibrated_groups() {
    let c = generate_cohort(&CohortSpec::default()).unwrap();
    let rows: Vec<FeatureVector> = c.bundles.iter().map(extract_all).collect();
    let e = EffectProfile::calibrated().get("glucose_cv");
    for (positive, target, n) in [(true, e.positive, 55.0), (false, e.negative, 38.0)] {
        let vals: Vec<f64> = rows
            .iter()
            .zip(&c.labels)
            .filter(|(_, l)| l.is_positive() == positive)
            .map(|(r, _)| r.values[60])
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let se = e.std / f64::sqrt(n);
        assert!((mean - target).abs() < 3.0 * se, "group mean {mean} vs {target}");
    }
}

#[test]
fn permutation_preserves_counts_and_inverts() {
    let c = generate_cohort(&small(5)).unwrap();
    let p = plant_label_permutation(&c, 11);
    assert_eq!(p.bundles, c.bundles);
    let count = |ls: &[Label]| ls.iter().filter(|l| l.is_positive()).count();
    assert_eq!(count(&p.labels), count(&c.labels));
    let perm = label_permutation(c.len(), 11);
    let mut back = vec![Label::LostLt2Pct; c.len()];
    for (i, &j) in perm.iter().enumerate() {
        back[j] = p.labels[i];
    }
    assert_eq!(back, c.labels);
}

#[test]
fn profile_scaling_keeps_midpoints() {
    let base = EffectProfile::calibrated();
    let amp = base.scaled(3.0);
    for name in SIGNALS {
        let (a, b) = (base.get(name), amp.get(name));
        assert!((a.midpoint() - b.midpoint()).abs() < 1e-9);
        assert!(((b.positive - b.negative) - 3.0 * (a.positive - a.negative)).abs() < 1e-9);
    }
    let calm = amp.without_emotional_state();
    for name in EMOTIONAL_SIGNALS {
        assert_eq!(calm.get(name).cohens_d(), 0.0);
    }
    assert_eq!(calm.get("glucose_cv"), amp.get("glucose_cv"));
    assert!(EffectProfile::null().0.values().all(|e| e.positive == e.negative));
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = small(0);
    s.n_negative = 0;
    assert!(generate_cohort(&s).is_err());
    let mut s = small(0);
    s.effects.0.insert("made_up".into(), Effect::new(1.0, 0.0, 1.0));
    assert!(s.validate().is_err());
}
