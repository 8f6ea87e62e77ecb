use std::collections::HashMap;

use rand::RngExt;
use rayon::prelude::*;

use super::{CvPlan, Design, Method, SelectionConfig, SelectionResult, TraceStep};
use crate::error::Result;
use crate::rng::{self, StreamRng};

type Mask = Vec<bool>;

fn active(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect()
}

/// At least one and at most `max` bits set.
fn repair(mask: &mut Mask, max: usize, r: &mut StreamRng) {
    let d = mask.len();
    let mut on = active(mask);
    if on.is_empty() {
        mask[r.random_range(0..d)] = true;
        return;
    }
    while on.len() > max {
        let k = r.random_range(0..on.len());
        mask[on.swap_remove(k)] = false;
    }
}

/// Best (highest fitness, then lowest index) of `size` random entrants.
fn tournament(fitness: &[f64], size: usize, r: &mut StreamRng) -> usize {
    let mut best = r.random_range(0..fitness.len());
    for _ in 1..size {
        let c = r.random_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Genetic search over feature bitmasks.
///
/// Fitness is the CV AUC minus `ga_penalty` per active feature. Every
/// generation keeps the `ga_elitism` fittest, then fills the population with
/// children of tournament winners via uniform crossover and bit-flip
/// mutation. The best mask ever seen is returned.
pub fn genetic_select(design: &Design, config: &SelectionConfig) -> Result<SelectionResult> {
    let plan = CvPlan::new(&design.y, config.cv_folds, rng::derive_seed(config.seed, &[0x6761]))?;
    let usable = design.usable_columns();
    let candidates = design.prescreen(&usable, config.candidate_pool);
    let d = candidates.len();
    if d == 0 {
        return Ok(SelectionResult::from_columns(Method::Genetic, design, &[], &[], Vec::new()));
    }
    let spec = config.scorer();
    let max = config.max_features.min(d);
    let mutation = if config.ga_mutation > 0.0 {
        config.ga_mutation
    } else {
        1.0 / d as f64
    };
    let density = (max as f64 / d as f64).min(0.5);
    let mut cache: HashMap<Mask, f64> = HashMap::new();
    let mut evaluate = |pop: &[Mask]| -> Result<Vec<f64>> {
        let mut todo: Vec<Mask> = pop.iter().filter(|m| !cache.contains_key(*m)).cloned().collect();
        todo.sort();
        todo.dedup();
        let fresh: Vec<Result<f64>> = todo
            .par_iter()
            .map(|m| {
                let cols: Vec<usize> = active(m).into_iter().map(|k| candidates[k]).collect();
                let s = plan.score(design, &cols, &spec)?;
                Ok(s - config.ga_penalty * cols.len() as f64)
            })
            .collect();
        for (m, f) in todo.into_iter().zip(fresh) {
            cache.insert(m, f?);
        }
        Ok(pop.iter().map(|m| cache[m]).collect())
    };

    let mut r = rng::stream(config.seed, &[0x6761, 0]);
    let mut pop: Vec<Mask> = (0..config.ga_population)
        .map(|_| {
            let mut m: Mask = (0..d).map(|_| r.random::<f64>() < density).collect();
            repair(&mut m, max, &mut r);
            m
        })
        .collect();
    let mut best: Option<(f64, Mask)> = None;
    let mut trace = Vec::new();
    for generation in 0..=config.ga_generations {
        let fitness = evaluate(&pop)?;
        for (m, &f) in pop.iter().zip(&fitness) {
            let better = match &best {
                None => true,
                Some((bf, bm)) => f > *bf || (f == *bf && m < bm),
            };
            if better {
                best = Some((f, m.clone()));
            }
        }
        let (bf, bm) = best.as_ref().expect("non-empty population");
        trace.push(TraceStep {
            step: generation,
            size: active(bm).len(),
            score: *bf,
        });
        if generation == config.ga_generations {
            break;
        }
        let mut r = rng::stream(config.seed, &[0x6761, generation as u64 + 1]);
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let mut next: Vec<Mask> = order[..config.ga_elitism].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < pop.len() {
            let a = &pop[tournament(&fitness, config.ga_tournament, &mut r)];
            let b = &pop[tournament(&fitness, config.ga_tournament, &mut r)];
            let mut child: Mask = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| if r.random::<f64>() < config.ga_crossover { x } else { y })
                .collect();
            for bit in &mut child {
                if r.random::<f64>() < mutation {
                    *bit = !*bit;
                }
            }
            repair(&mut child, max, &mut r);
            next.push(child);
        }
        pop = next;
    }
    let (_, mask) = best.expect("non-empty population");
    let selected: Vec<usize> = active(&mask).into_iter().map(|k| candidates[k]).collect();
    Ok(SelectionResult::from_columns(
        Method::Genetic,
        design,
        &selected,
        &candidates,
        trace,
    ))
}

/// Fitness of one subset of candidate columns, as the GA computes it.
pub fn genetic_fitness(design: &Design, cols: &[usize], config: &SelectionConfig) -> Result<f64> {
    let plan = CvPlan::new(&design.y, config.cv_folds, rng::derive_seed(config.seed, &[0x6761]))?;
    Ok(plan.score(design, cols, &config.scorer())? - config.ga_penalty * cols.len() as f64)
}
