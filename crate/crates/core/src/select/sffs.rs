use std::collections::HashMap;

use rayon::prelude::*;

use super::{CvPlan, Design, Method, SelectionConfig, SelectionResult, TraceStep};
use crate::error::Result;
use crate::learners::ModelSpec;
use crate::rng;

/// Memoized subset scores on a fixed fold plan.
struct Scorer<'a> {
    design: &'a Design,
    plan: CvPlan,
    spec: ModelSpec,
    cache: HashMap<Vec<usize>, f64>,
}

impl Scorer<'_> {
    fn key(set: &[usize]) -> Vec<usize> {
        let mut k = set.to_vec();
        k.sort_unstable();
        k
    }

    /// Scores every subset, evaluating uncached ones in parallel.
    fn score_all(&mut self, sets: &[Vec<usize>]) -> Result<Vec<f64>> {
        let mut todo: Vec<Vec<usize>> = sets
            .iter()
            .map(|s| Self::key(s))
            .filter(|k| !self.cache.contains_key(k))
            .collect();
        todo.dedup();
        let (design, plan, spec) = (self.design, &self.plan, &self.spec);
        let fresh: Vec<Result<f64>> = todo
            .par_iter()
            .map(|k| plan.score(design, k, spec))
            .collect();
        for (k, s) in todo.into_iter().zip(fresh) {
            self.cache.insert(k, s?);
        }
        Ok(sets.iter().map(|s| self.cache[&Self::key(s)]).collect())
    }
}

/// Picks the highest score; ties go to the lowest feature id.
fn argmax(design: &Design, options: &[usize], scores: &[f64]) -> Option<(usize, f64)> {
    options
        .iter()
        .zip(scores)
        .map(|(&j, &s)| (j, s))
        .reduce(|best, cur| {
            if cur.1 > best.1 || (cur.1 == best.1 && design.ids[cur.0] < design.ids[best.0]) {
                cur
            } else {
                best
            }
        })
}

/// Sequential forward floating selection.
///
/// Starts from the empty set (chance score 0.5), adds the best candidate while
/// it gains more than `epsilon_gain`, and after each addition drops features
/// whose removal strictly raises the score. The score therefore rises with
/// every accepted move, which rules out cycling.
pub fn sffs(design: &Design, config: &SelectionConfig) -> Result<SelectionResult> {
    let plan = CvPlan::new(&design.y, config.cv_folds, rng::derive_seed(config.seed, &[0x7366]))?;
    let usable = design.usable_columns();
    let candidates = design.prescreen(&usable, config.candidate_pool);
    let mut scorer = Scorer {
        design,
        plan,
        spec: config.scorer(),
        cache: HashMap::new(),
    };
    let mut selected: Vec<usize> = Vec::new();
    let mut current = 0.5;
    let mut trace = vec![TraceStep {
        step: 0,
        size: 0,
        score: current,
    }];
    let max = config.max_features.min(candidates.len());
    while selected.len() < max {
        let options: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|j| !selected.contains(j))
            .collect();
        let sets: Vec<Vec<usize>> = options
            .iter()
            .map(|&j| {
                let mut s = selected.clone();
                s.push(j);
                s
            })
            .collect();
        let scores = scorer.score_all(&sets)?;
        let Some((best, score)) = argmax(design, &options, &scores) else {
            break;
        };
        if score - current <= config.epsilon_gain {
            break;
        }
        selected.push(best);
        current = score;
        trace.push(TraceStep {
            step: trace.len(),
            size: selected.len(),
            score,
        });
        // conditional exclusion; the feature just added stays
        while selected.len() > 2 {
            let removable: Vec<usize> = selected.iter().copied().filter(|&j| j != best).collect();
            let sets: Vec<Vec<usize>> = removable
                .iter()
                .map(|&r| selected.iter().copied().filter(|&j| j != r).collect())
                .collect();
            let scores = scorer.score_all(&sets)?;
            let Some((drop, score)) = argmax(design, &removable, &scores) else {
                break;
            };
            if score <= current {
                break;
            }
            selected.retain(|&j| j != drop);
            current = score;
            trace.push(TraceStep {
                step: trace.len(),
                size: selected.len(),
                score,
            });
        }
    }
    Ok(SelectionResult::from_columns(
        Method::Sffs,
        design,
        &selected,
        &candidates,
        trace,
    ))
}
