use proptest::prelude::*;

use super::*;
use crate::features::{CohortMatrix, FeatureId};
use crate::learners::{ModelKind, ModelSpec};
use crate::select::{Design, Method, SelectionConfig};
use crate::synth::{generate_cohort, CohortSpec, EffectProfile};

#[test]
fn auc_examples() {
    assert_eq!(auc(&[0.9, 0.9], &[0.1, 0.1]).unwrap(), 1.0);
    assert_eq!(auc(&[0.3, 0.3], &[0.3]).unwrap(), 0.5);
    assert_eq!(auc(&[0.8, 0.6], &[0.7, 0.2]).unwrap(), 0.75);
    assert!(auc(&[], &[0.2]).is_err());
}

#[test]
fn roc_examples() {
    let perfect = roc_curve(&[0.9, 0.8], &[0.1]).unwrap();
    assert!(perfect.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
    let flat = roc_curve(&[0.5], &[0.5, 0.5]).unwrap();
    let pts: Vec<(f64, f64)> = flat.iter().map(|p| (p.fpr, p.tpr)).collect();
    assert_eq!(pts, vec![(0.0, 0.0), (1.0, 1.0)]);
}

#[test]
fn split_examples() {
    let labels: Vec<bool> = (0..93).map(|i| i < 55).collect();
    let plan = make_loocv_splits(&labels, 0).unwrap();
    assert_eq!(plan.len(), 55);
    let app = plan.appearances();
    assert!(app.iter().all(|&c| c >= 1));
    assert!(app[55..].iter().all(|&c| c == 1 || c == 2));
    assert!(app[..55].iter().all(|&c| c == 1));

    let small = make_loocv_splits(&[true, true, true, false, false], 4).unwrap();
    assert_eq!(small.len(), 3);
    let mut neg = small.appearances()[3..].to_vec();
    neg.sort();
    assert_eq!(neg, vec![1, 2]);

    assert_eq!(make_loocv_splits(&[false, true], 0).unwrap().len(), 1);
    assert!(make_loocv_splits(&[true, true], 0).is_err());
}

#[test]
fn split_train_excludes_test_pair() {
    let labels = [true, false, true, false, true];
    let plan = make_loocv_splits(&labels, 1).unwrap();
    for k in 0..plan.len() {
        let [p, n] = plan.test(k);
        assert!(labels[p] && !labels[n]);
        let train = plan.train(k);
        assert_eq!(train.len(), 3);
        assert!(!train.contains(&p) && !train.contains(&n));
    }
}

fn small_cohort(scale: f64, seed: u64) -> CohortMatrix {
    let spec = CohortSpec {
        n_positive: 12,
        n_negative: 9,
        days: 7,
        effects: EffectProfile::calibrated().scaled(scale),
        seed,
        ..CohortSpec::default()
    };
    let c = generate_cohort(&spec).unwrap();
    CohortMatrix::from_bundles(&c.bundles, &c.labels).unwrap()
}

fn quick_config(method: Method) -> ExperimentConfig {
    ExperimentConfig {
        scenario: Scenario::Ds4,
        selection: SelectionConfig {
            method,
            scorer_model: Some(ModelSpec::new(ModelKind::Lr)),
            cv_folds: 3,
            max_features: 3,
            candidate_pool: 10,
            ga_population: 6,
            ga_generations: 2,
            boruta_max_iter: 12,
            boruta_trees: 20,
            ..SelectionConfig::default()
        },
        model: ModelSpec::new(ModelKind::Lr),
        seeds: vec![0, 1],
        leaky_selection: false,
    }
}

#[test]
fn experiment_report_is_consistent_and_deterministic() {
    let m = small_cohort(3.0, 2);
    let cfg = quick_config(Method::Sffs);
    let r = run_experiment(&m, &cfg).unwrap();
    assert_eq!(r.per_run_auc.len(), 2);
    let mean = r.per_run_auc.iter().sum::<f64>() / 2.0;
    assert!((r.mean_auc - mean).abs() < 1e-15);
    assert_eq!((r.roc[0].fpr, r.roc[0].tpr), (0.0, 0.0));
    let last = r.roc.last().unwrap();
    assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    assert_eq!(r.per_subject_scores.len(), 21);
    assert_eq!(r.fits, 2 * 12);
    assert_eq!(r.selection_mode, SelectionMode::PerSplit);
    let again = run_experiment(&m, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&r).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    // the scenario fences selection to its block
    assert!(r.selection_counts.keys().all(|id| (1..=65).contains(&id.get())));
}

#[test]
fn every_selector_runs_through_the_harness() {
    let m = small_cohort(3.0, 3);
    for method in Method::ALL {
        let r = run_experiment(&m, &quick_config(method)).unwrap();
        assert!((0.0..=1.0).contains(&r.mean_auc), "{method}");
    }
}

#[test]
fn per_split_fitting_never_sees_test_rows() {
    let m = small_cohort(2.0, 4);
    let cfg = quick_config(Method::Sffs);
    let design = Design::from_matrix(&m, &cfg.scenario.feature_ids());
    let plan = make_loocv_splits(&design.y, 0).unwrap();
    for k in 0..3 {
        let (a, b) = leakage_audit(&design, &plan, k, &cfg, 0).unwrap();
        assert_eq!(a, b, "split {k}");
    }
}

#[test]
fn leaky_selection_is_caught_by_the_audit() {
    let m = small_cohort(2.0, 4);
    let cfg = ExperimentConfig {
        leaky_selection: true,
        ..quick_config(Method::Sffs)
    };
    let design = Design::from_matrix(&m, &cfg.scenario.feature_ids());
    let plan = make_loocv_splits(&design.y, 0).unwrap();
    // the global selector saw the test rows, so erasing them moves it
    let leaks = (0..plan.len())
        .filter(|&k| {
            let (a, b) = leakage_audit(&design, &plan, k, &cfg, 0).unwrap();
            a != b
        })
        .count();
    let r = run_experiment(&m, &cfg).unwrap();
    assert_eq!(r.selection_mode, SelectionMode::LeakyGlobal);
    assert!(leaks > 0);
}

#[test]
fn missing_class_is_a_domain_error() {
    let m = small_cohort(1.0, 5);
    let keep: Vec<usize> = (0..m.len()).filter(|&i| m.labels[i].is_positive()).collect();
    let only_pos = CohortMatrix::new(
        keep.iter().map(|&i| m.rows[i].clone()).collect(),
        keep.iter().map(|&i| m.labels[i]).collect(),
    )
    .unwrap();
    assert!(run_experiment(&only_pos, &quick_config(Method::None)).is_err());
}

#[test]
fn report_files_round_trip() {
    let m = small_cohort(3.0, 6);
    let r = run_experiment(&m, &quick_config(Method::None)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join(EVAL_FILE);
    write_eval_json(&p, &r).unwrap();
    assert_eq!(read_eval_json(&p).unwrap(), r);
    let roc = dir.path().join(ROC_FILE);
    write_roc_csv(&roc, &r.roc).unwrap();
    let text = std::fs::read_to_string(&roc).unwrap();
    assert!(text.starts_with("fpr,tpr,threshold\n0,0,inf\n"));
    let t = dir.path().join(RESULTS_TABLE_FILE);
    let mut table = ResultsTable::read(&t).unwrap();
    table.insert(&r);
    table.write(&t).unwrap();
    let back = ResultsTable::read(&t).unwrap();
    let v = back.get(Scenario::Ds4, ModelKind::Lr, Method::None).unwrap();
    assert!((v - 100.0 * r.mean_auc).abs() < 0.005);
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.starts_with("scenario,model,SFFS,Boruta,GA,All\nds4,LR,,,,"));
}

#[test]
fn scenario_ids_follow_blocks() {
    assert_eq!(Scenario::Ds9.feature_ids().len(), 20);
    assert_eq!(Scenario::Combined.feature_ids().len(), 284);
    assert_eq!(Scenario::Ds6.feature_ids()[0], FeatureId::new(66).unwrap());
    assert!("ds5".parse::<Scenario>().is_err());
}

fn scores() -> impl Strategy<Value = Vec<f64>> {
    // a coarse grid so ties are common
    prop::collection::vec((0u8..12).prop_map(|v| v as f64 / 4.0), 1..15)
}

proptest! {
    #[test]
    fn auc_equals_trapezoid_area(pos in scores(), neg in scores()) {
        let a = auc(&pos, &neg).unwrap();
        let curve = roc_curve(&pos, &neg).unwrap();
        prop_assert!((a - trapezoid_area(&curve)).abs() < 1e-12);
        for w in curve.windows(2) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
    }

    #[test]
    fn auc_is_antisymmetric_without_ties(v in prop::collection::hash_set(0u32..1000, 2..30), cut in 1usize..29) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let cut = cut.min(v.len() - 1);
        let (p, n) = v.split_at(cut);
        let s = auc(p, n).unwrap() + auc(n, p).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_ignores_monotone_transforms(pos in scores(), neg in scores()) {
        let f = |v: &Vec<f64>| v.iter().map(|x| (3.0 * x).exp() - 2.0).collect::<Vec<_>>();
        prop_assert_eq!(auc(&pos, &neg).unwrap(), auc(&f(&pos), &f(&neg)).unwrap());
    }

    #[test]
    fn splits_cover_everyone(np in 1usize..30, nn in 1usize..30, seed in 0u64..50) {
        let labels: Vec<bool> = (0..np + nn).map(|i| i < np).collect();
        let plan = make_loocv_splits(&labels, seed).unwrap();
        prop_assert_eq!(plan.len(), np.max(nn));
        let app = plan.appearances();
        let (hi, lo) = if np >= nn { (np, nn) } else { (nn, np) };
        let minority = if np >= nn { &app[np..] } else { &app[..np] };
        for &c in minority {
            prop_assert!(c == hi / lo || c == hi.div_ceil(lo));
        }
        prop_assert!(app.iter().all(|&c| c >= 1));
    }
}
