//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.
//!
//! The planted-cohort experiments run for a few minutes; build with the
//! test profile (optimized) as configured in the workspace.

use std::io::Write;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use wearlab::cohortstats::{bh_fdr, chi_square_test, pearson, rank_sum_test, EXACT_MAX_N};
use wearlab::eval::{
    auc, make_loocv_splits, roc_curve, run_experiment, trapezoid_area, EvalReport,
    ExperimentConfig, Scenario, EVAL_FILE,
};
use wearlab::features::{estimated_hba1c, CohortMatrix, Dataset, FeatureId, FeatureRegistry};
use wearlab::learners::{loss_and_grad, Mlp, ModelKind, ModelSpec};
use wearlab::pipeline::{run_pipeline, PipelineConfig};
use wearlab::select::{boruta, genetic_fitness, genetic_select, Decision, Design, Method, SelectionConfig};
use wearlab::synth::{
    generate_cohort, plant_label_permutation, write_synthetic_cohort, Cohort, CohortSpec,
    EffectProfile,
};

fn report(criterion: u32, title: &str, ok: bool, detail: &str, started: Instant) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "[acceptance {criterion:>2}] {verdict} {title}: {detail} ({:.1?})",
        started.elapsed()
    );
    let _ = out.flush();
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Experiment settings used for the planted cohorts: SFFS scored by a small
/// boosted ensemble over a 40-feature candidate pool, default GB downstream.
fn planted_experiment(scenario: Scenario) -> ExperimentConfig {
    let mut selection = SelectionConfig::new(Method::Sffs);
    selection.scorer_model = Some(
        ModelSpec::new(ModelKind::Gb)
            .with("n_trees", 10.0)
            .with("max_depth", 2.0),
    );
    selection.cv_folds = 3;
    selection.candidate_pool = 40;
    ExperimentConfig {
        scenario,
        selection,
        model: ModelSpec::new(ModelKind::Gb),
        seeds: (0..5).collect(),
        leaky_selection: false,
    }
}

fn amplified_cohort(effects: EffectProfile) -> Cohort {
    generate_cohort(&CohortSpec {
        effects,
        ..CohortSpec::default()
    })
    .unwrap()
}

fn matrix_of(c: &Cohort) -> CohortMatrix {
    CohortMatrix::from_bundles(&c.bundles, &c.labels).unwrap()
}

#[test]
fn c01_registry_conformance() {
    let t = Instant::now();
    let r = FeatureRegistry::global();
    let sizes: Vec<usize> = Dataset::ALL
        .iter()
        .map(|&ds| r.entries().iter().filter(|e| e.dataset == ds).count())
        .collect();
    let table = [
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
        ("avg minutes below default zone 1", 146),
        ("avg sedentary minutes last week", 160),
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
    ];
    let unresolved: Vec<&str> = table
        .iter()
        .filter(|(name, id)| r.lookup(name).map(FeatureId::get) != Some(*id))
        .map(|(name, _)| *name)
        .collect();
    let ok = r.len() == 284 && sizes == [65, 58, 44, 97, 20] && unresolved.is_empty();
    report(
        1,
        "registry conformance",
        ok,
        &format!("{} entries, blocks {sizes:?}, unresolved {unresolved:?}", r.len()),
        t,
    );
    assert!(ok);
    assert!(t.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn c02_hba1c_consistency() {
    let t = Instant::now();
    let cases = [(100.05, 5.11), (100.87, 5.14), (98.85, 5.07)];
    let got: Vec<f64> = cases
        .iter()
        .map(|&(g, _)| estimated_hba1c(g).unwrap())
        .collect();
    let ok = cases
        .iter()
        .zip(&got)
        .all(|(&(_, want), v)| (v - want).abs() <= 0.005);
    report(2, "HbA1c consistency", ok, &format!("{got:.4?}"), t);
    assert!(ok);
}

fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// U statistic and exact two-sided p by enumerating every assignment of
/// `a.len()` pooled positions to the first group.
fn rank_sum_oracle(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let na = a.len();
    // twice the midrank: 2 * (#below) + (#equal, self included) + 1
    let twice: Vec<i64> = pooled
        .iter()
        .map(|v| {
            let below = pooled.iter().filter(|w| *w < v).count() as i64;
            let equal = pooled.iter().filter(|w| *w == v).count() as i64;
            2 * below + equal + 1
        })
        .collect();
    let offset = (na * (na + 1)) as i64;
    let mid = (na * (n - na)) as i64;
    let u2_of = |mask: u32| -> i64 {
        (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| twice[i]).sum::<i64>() - offset
    };
    let observed = u2_of((1u32 << na) - 1);
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        if (u2_of(mask) - mid).abs() >= (observed - mid).abs() {
            hits += 1;
        }
    }
    (observed as f64 / 2.0, hits as f64 / total as f64)
}

fn chi_square_oracle(t: [[u64; 2]; 2]) -> (f64, f64) {
    let n: f64 = t.iter().flatten().sum::<u64>() as f64;
    let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] as f64 * cols[j] as f64 / n;
            stat += (t[i][j] as f64 - e).powi(2) / e;
        }
    }
    (stat, ChiSquared::new(1.0).unwrap().sf(stat))
}

fn bh_oracle(p: &[f64]) -> Vec<f64> {
    let m = p.len() as f64;
    p.iter()
        .map(|&pi| {
            p.iter()
                .filter(|&&pj| pj >= pi)
                .map(|&pj| {
                    let rank = p.iter().filter(|&&pk| pk <= pj).count() as f64;
                    pj * m / rank
                })
                .fold(f64::INFINITY, f64::min)
                .min(1.0)
        })
        .collect()
}

#[test]
fn c03_statistical_oracles() {
    let t = Instant::now();
    let mut r = rng(3);
    let mut failures = Vec::new();

    for case in 0..100 {
        let n = r.random_range(3..30usize);
        let x: Vec<f64> = (0..n).map(|_| gauss(&mut r) * 10.0 + 50.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + gauss(&mut r) * 5.0).collect();
        let got = pearson(&x, &y).unwrap();
        if (got - pearson_oracle(&x, &y)).abs() > 1e-9 {
            failures.push(format!("pearson case {case}"));
        }
    }

    for case in 0..100 {
        let n = r.random_range(2..=EXACT_MAX_N);
        let na = r.random_range(1..n);
        // small value alphabet so ties are common
        let levels = r.random_range(2..8u32);
        let draw = |r: &mut ChaCha8Rng| r.random_range(0..levels) as f64;
        let a: Vec<f64> = (0..na).map(|_| draw(&mut r)).collect();
        let b: Vec<f64> = (0..n - na).map(|_| draw(&mut r)).collect();
        let got = rank_sum_test(&a, &b);
        let (u, p) = rank_sum_oracle(&a, &b);
        if (got.statistic - u).abs() > 1e-9 || got.p_value != p {
            failures.push(format!("rank-sum case {case}: {got:?} vs ({u}, {p})"));
        }
    }

    let mut done = 0;
    while done < 100 {
        let table = [
            [r.random_range(0..30u64), r.random_range(0..30u64)],
            [r.random_range(0..30u64), r.random_range(0..30u64)],
        ];
        let zero_margin = table[0][0] + table[0][1] == 0
            || table[1][0] + table[1][1] == 0
            || table[0][0] + table[1][0] == 0
            || table[0][1] + table[1][1] == 0;
        let got = chi_square_test(table);
        if zero_margin {
            if got.is_some() {
                failures.push(format!("chi-square {table:?} should be undefined"));
            }
            continue;
        }
        done += 1;
        let got = got.unwrap();
        let (stat, p) = chi_square_oracle(table);
        if (got.statistic - stat).abs() > 1e-9 || (got.p_value - p).abs() > 1e-9 {
            failures.push(format!("chi-square {table:?}: {got:?} vs ({stat}, {p})"));
        }
    }

    for case in 0..100 {
        let m = r.random_range(1..25usize);
        let coarse = r.random::<bool>();
        let p: Vec<f64> = (0..m)
            .map(|_| {
                let v: f64 = r.random();
                if coarse {
                    (v * 10.0).round() / 10.0
                } else {
                    v
                }
            })
            .collect();
        let got = bh_fdr(&p);
        let want = bh_oracle(&p);
        if got.iter().zip(&want).any(|(g, w)| (g - w).abs() > 1e-9) {
            failures.push(format!("BH case {case}: {p:?}"));
        }
    }

    let ok = failures.is_empty() && t.elapsed().as_secs_f64() < 30.0;
    report(
        3,
        "statistical oracle equivalence",
        ok,
        &format!("400 instances, {} mismatches {:?}", failures.len(), failures.first()),
        t,
    );
    assert!(ok, "{failures:#?}");
}

#[test]
fn c04_auc_equals_trapezoid() {
    let t = Instant::now();
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let np = r.random_range(1..40usize);
        let nn = r.random_range(1..40usize);
        let levels = r.random_range(2..12u32);
        let pos: Vec<f64> = (0..np).map(|_| r.random_range(0..levels) as f64 / 4.0).collect();
        let neg: Vec<f64> = (0..nn).map(|_| r.random_range(0..levels) as f64 / 5.0).collect();
        let a = auc(&pos, &neg).unwrap();
        let area = trapezoid_area(&roc_curve(&pos, &neg).unwrap());
        worst = worst.max((a - area).abs());
    }
    let ok = worst <= 1e-12;
    report(4, "AUC identity", ok, &format!("max |AUC - area| = {worst:e}"), t);
    assert!(ok);
}

#[test]
fn c05_planted_signal_end_to_end() {
    let t = Instant::now();
    let cohort = amplified_cohort(EffectProfile::calibrated().scaled(3.0));
    let config = planted_experiment(Scenario::Combined);
    let planted = run_experiment(&matrix_of(&cohort), &config).unwrap();
    let permuted_cohort = plant_label_permutation(&cohort, 0);
    let permuted = run_experiment(&matrix_of(&permuted_cohort), &config).unwrap();
    let ok = planted.mean_auc >= 0.80 && (0.40..=0.60).contains(&permuted.mean_auc);
    report(
        5,
        "planted signal end to end",
        ok,
        &format!(
            "planted mean AUC {:.4} (>= 0.80), permuted {:.4} (in [0.40, 0.60])",
            planted.mean_auc, permuted.mean_auc
        ),
        t,
    );
    assert!(ok);
}

#[test]
fn c06_scenario_ordering() {
    let t = Instant::now();
    let cohort = amplified_cohort(
        EffectProfile::calibrated()
            .scaled(3.0)
            .without_emotional_state(),
    );
    let m = matrix_of(&cohort);
    let combined = run_experiment(&m, &planted_experiment(Scenario::Combined)).unwrap();
    let ds9 = run_experiment(&m, &planted_experiment(Scenario::Ds9)).unwrap();
    let ok = combined.mean_auc > ds9.mean_auc;
    report(
        6,
        "scenario ordering",
        ok,
        &format!("combined {:.4} > ds9 {:.4}", combined.mean_auc, ds9.mean_auc),
        t,
    );
    assert!(ok);
}

fn planted_design(n: usize, planted: usize, noise_cols: usize, noise: f64, seed: u64) -> Design {
    let mut r = rng(seed);
    let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let x = y
        .iter()
        .map(|&l| {
            let signal = if l { 1.0 } else { 0.0 };
            let mut row: Vec<f64> = (0..planted).map(|_| signal + noise * gauss(&mut r)).collect();
            row.extend((0..noise_cols).map(|_| gauss(&mut r)));
            row
        })
        .collect();
    let ids = (0..planted + noise_cols).map(FeatureId::from_index).collect();
    Design::new(ids, x, y).unwrap()
}

#[test]
fn c07_boruta_error_control() {
    let t = Instant::now();
    let mut good = 0;
    let mut detail = Vec::new();
    for seed in 0..20 {
        let d = planted_design(93, 3, 50, 0.7, 100 + seed);
        let config = SelectionConfig {
            seed,
            candidate_pool: 0,
            ..SelectionConfig::new(Method::Boruta)
        };
        let res = boruta(&d, &config).unwrap();
        let confirmed = |k: usize| res.decisions[&d.ids[k]] == Decision::Selected;
        let planted_ok = (0..3).all(confirmed);
        let false_hits = (3..53).filter(|&k| confirmed(k)).count();
        if planted_ok && false_hits <= 2 {
            good += 1;
        }
        detail.push(format!("{}{}", if planted_ok { "+" } else { "-" }, false_hits));
    }
    let ok = good >= 19 && t.elapsed().as_secs_f64() < 300.0;
    report(
        7,
        "Boruta error control",
        ok,
        &format!("{good}/20 seeds good; planted/false confirmations {}", detail.join(" ")),
        t,
    );
    assert!(ok);
}

#[test]
fn c08_genetic_matches_exhaustive_optimum() {
    let t = Instant::now();
    let mut matches = 0;
    let mut gaps = Vec::new();
    for seed in 0..20 {
        let d = planted_design(60, 1, 7, 1.0, 200 + seed);
        let config = SelectionConfig {
            seed,
            scorer_model: Some(ModelSpec::new(ModelKind::Lr)),
            candidate_pool: 0,
            ..SelectionConfig::new(Method::Genetic)
        };
        let mut best = f64::NEG_INFINITY;
        let mut best_mask = 0u32;
        for mask in 1u32..256 {
            let cols: Vec<usize> = (0..8).filter(|&k| mask >> k & 1 == 1).collect();
            let f = genetic_fitness(&d, &cols, &config).unwrap();
            if f > best {
                best = f;
                best_mask = mask;
            }
        }
        let res = genetic_select(&d, &config).unwrap();
        let cols = res.columns_in(&d);
        let got = genetic_fitness(&d, &cols, &config).unwrap();
        let mask: u32 = cols.iter().map(|&k| 1u32 << k).sum();
        if mask == best_mask || got == best {
            matches += 1;
        } else {
            gaps.push(best - got);
        }
    }
    let ok = matches >= 18 && t.elapsed().as_secs_f64() < 120.0;
    report(
        8,
        "GA oracle match",
        ok,
        &format!("{matches}/20 seeds reach the exhaustive optimum; misses short by {gaps:.4?}"),
        t,
    );
    assert!(ok);
}

#[test]
fn c09_protocol_structure() {
    let t = Instant::now();
    let labels: Vec<bool> = (0..93).map(|i| i < 55).collect();
    let plan = make_loocv_splits(&labels, 9).unwrap();
    let one_per_class = (0..plan.len()).all(|k| {
        let [p, n] = plan.test(k);
        labels[p] && !labels[n]
    });
    let covered = plan.appearances().iter().all(|&c| c >= 1);
    let ok = plan.len() == 55 && one_per_class && covered && plan.appearances().len() == 93;
    report(
        9,
        "protocol structure",
        ok,
        &format!("{} splits, one subject per class {one_per_class}, all 93 covered {covered}", plan.len()),
        t,
    );
    assert!(ok);
}

#[test]
fn c10_thread_count_does_not_change_results() {
    let t = Instant::now();
    let cohort = amplified_cohort(EffectProfile::calibrated().scaled(3.0));
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("cohort");
    write_synthetic_cohort(&root, &cohort).unwrap();
    let mut bytes = Vec::new();
    for threads in [1, 8] {
        let output = dir.path().join(format!("out{threads}"));
        let config = PipelineConfig {
            cohort: root.clone(),
            output: output.clone(),
            experiment: planted_experiment(Scenario::Combined),
            threads,
            verbose: false,
            stats: true,
        };
        run_pipeline(&config).unwrap();
        bytes.push(std::fs::read(output.join(EVAL_FILE)).unwrap());
    }
    let report_back: EvalReport = serde_json::from_slice(&bytes[0]).unwrap();
    let ok = bytes[0] == bytes[1];
    report(
        10,
        "determinism across thread counts",
        ok,
        &format!(
            "eval.json {} bytes, identical {ok}, mean AUC {:.4}",
            bytes[0].len(),
            report_back.mean_auc
        ),
        t,
    );
    assert!(ok);
}

#[test]
fn c11_mlp_gradient_check() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut r = rng(1100 + seed);
        let d = r.random_range(1..6usize);
        let h = r.random_range(1..7usize);
        let n = r.random_range(1..8usize);
        let mut params = Mlp::init(d, h, &mut r).params;
        // move biases off zero so no unit sits on the ReLU kink
        for p in &mut params {
            *p += 0.3 * r.random::<f64>() - 0.15;
        }
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| gauss(&mut r)).collect()).collect();
        let y: Vec<bool> = (0..n).map(|_| r.random()).collect();
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let l2 = 0.01;
        let (_, grad) = loss_and_grad(&params, d, h, &rows, &y, l2);
        let eps = 1e-6;
        for k in 0..params.len() {
            let mut plus = params.clone();
            plus[k] += eps;
            let mut minus = params.clone();
            minus[k] -= eps;
            let numeric = (loss_and_grad(&plus, d, h, &rows, &y, l2).0
                - loss_and_grad(&minus, d, h, &rows, &y, l2).0)
                / (2.0 * eps);
            let rel = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-7);
            worst = worst.max(rel);
        }
    }
    let ok = worst < 1e-4 && t.elapsed().as_secs_f64() < 10.0;
    report(11, "MLP gradient check", ok, &format!("worst relative error {worst:e}"), t);
    assert!(ok);
}
