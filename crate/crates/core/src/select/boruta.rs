use rand::seq::SliceRandom;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{Decision, Design, Method, SelectionConfig, SelectionResult};
use crate::error::Result;
use crate::learners::{ModelKind, ModelSpec, RandomForest};
use crate::{numeric, rng};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Undecided,
    Confirmed,
    Rejected,
}

/// P(X >= k) and P(X <= k) for X ~ Binomial(n, 1/2).
fn tails(k: u64, n: u64) -> (f64, f64) {
    let b = Binomial::new(0.5, n).expect("valid binomial");
    let upper = if k == 0 { 1.0 } else { b.sf(k - 1) };
    (upper, b.cdf(k))
}

/// All-relevant selection against permuted shadow features.
///
/// Each iteration appends a freshly permuted copy of every candidate feature,
/// fits a random forest and scores a hit for each real feature whose impurity
/// importance beats the best shadow. Rejected features stay in the forest so
/// the shadow maximum keeps its strength as decisions accumulate. Undecided features are then
/// tested against Binomial(iterations, 1/2), two-sided, Bonferroni-corrected
/// over the undecided count.
pub fn boruta(design: &Design, config: &SelectionConfig) -> Result<SelectionResult> {
    let usable = design.usable_columns();
    let candidates = design.prescreen(&usable, config.candidate_pool);
    let all_rows: Vec<usize> = (0..design.len()).collect();
    let mut filled = design.project(&all_rows, &candidates);
    let m = candidates.len();
    // forests only see ranks, so mean imputation is the only preprocessing
    for k in 0..m {
        let present: Vec<f64> = filled.iter().map(|r| r[k]).filter(|v| v.is_finite()).collect();
        let mean = numeric::mean(&present).unwrap_or(0.0);
        for r in &mut filled {
            if !r[k].is_finite() {
                r[k] = mean;
            }
        }
    }
    let mut status = vec![Status::Undecided; m];
    let mut hits = vec![0u64; m];
    let mut imp_sum = vec![0.0; m];
    let mut shadow_max = Vec::new();
    let n = design.len();
    for it in 0..config.boruta_max_iter {
        if m == 0 || !status.contains(&Status::Undecided) {
            break;
        }
        let mut x = filled.clone();
        for k in 0..m {
            let mut col: Vec<f64> = (0..n).map(|i| filled[i][k]).collect();
            col.shuffle(&mut rng::stream(config.seed, &[0x626f, it as u64, k as u64]));
            for i in 0..n {
                x[i].push(col[i]);
            }
        }
        let spec = ModelSpec::new(ModelKind::Rf)
            .with("n_trees", config.boruta_trees as f64)
            .with_seed(rng::derive_seed(config.seed, &[0x626f72, it as u64]));
        let rf = RandomForest::fit(&x, &design.y, &spec);
        let (real, shadow) = rf.importance.split_at(m);
        let best_shadow = shadow.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        shadow_max.push(best_shadow);
        for k in 0..m {
            imp_sum[k] += real[k];
            if real[k] > best_shadow {
                hits[k] += 1;
            }
        }
        let runs = it as u64 + 1;
        let undecided: Vec<usize> = (0..m).filter(|&k| status[k] == Status::Undecided).collect();
        let level = config.boruta_alpha / undecided.len() as f64;
        for k in undecided {
            let (upper, lower) = tails(hits[k], runs);
            if 2.0 * upper < level {
                status[k] = Status::Confirmed;
            } else if 2.0 * lower < level {
                status[k] = Status::Rejected;
            }
        }
    }
    let mut confirmed: Vec<usize> = (0..m).filter(|&k| status[k] == Status::Confirmed).collect();
    confirmed.sort_by(|&a, &b| {
        imp_sum[b]
            .total_cmp(&imp_sum[a])
            .then(design.ids[candidates[a]].cmp(&design.ids[candidates[b]]))
    });
    let keep = confirmed.len().min(config.max_features);
    let selected: Vec<usize> = confirmed[..keep].iter().map(|&k| candidates[k]).collect();
    let mut result = SelectionResult::from_columns(Method::Boruta, design, &selected, &candidates, Vec::new());
    // confirmed beyond the cap and undecided leftovers
    for k in (0..m).filter(|&k| status[k] == Status::Undecided).chain(confirmed[keep..].iter().copied()) {
        result.decisions.insert(design.ids[candidates[k]], Decision::Tentative);
    }
    result.shadow_max = shadow_max;
    Ok(result)
}
