//! Axis-aligned binary decision trees shared by the forest and boosting
//! learners.

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::rng::StreamRng;

const LEAF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: u32,
    /// Rows with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut k = 0usize;
        loop {
            let n = &self.nodes[k];
            if n.feature == LEAF {
                return n.value;
            }
            k = if row[n.feature as usize] <= n.threshold {
                n.left as usize
            } else {
                n.right as usize
            };
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature == LEAF).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, k: usize) -> usize {
            let n = &t.nodes[k];
            if n.feature == LEAF {
                0
            } else {
                1 + walk(t, n.left as usize).max(walk(t, n.right as usize))
            }
        }
        walk(self, 0)
    }
}

/// Split quality as a function of additive per-row statistics.
pub trait Criterion {
    type Stats: Copy + Default;
    fn row(&self, i: usize) -> Self::Stats;
    fn add(a: Self::Stats, b: Self::Stats) -> Self::Stats;
    fn sub(a: Self::Stats, b: Self::Stats) -> Self::Stats;
    /// Node score; a split's gain is `score(l) + score(r) - score(parent)`.
    fn score(&self, s: Self::Stats) -> f64;
    fn weight(s: Self::Stats) -> f64;
    fn leaf_value(&self, s: Self::Stats) -> f64;
    /// True when no split can improve the node.
    fn is_pure(&self, s: Self::Stats) -> bool;
}

/// Weighted Gini impurity; leaves hold the positive share.
pub struct Gini<'a> {
    pub y: &'a [bool],
    pub w: &'a [f64],
}

impl Criterion for Gini<'_> {
    /// (total weight, positive weight)
    type Stats = (f64, f64);

    fn row(&self, i: usize) -> Self::Stats {
        (self.w[i], if self.y[i] { self.w[i] } else { 0.0 })
    }

    fn add(a: Self::Stats, b: Self::Stats) -> Self::Stats {
        (a.0 + b.0, a.1 + b.1)
    }

    fn sub(a: Self::Stats, b: Self::Stats) -> Self::Stats {
        (a.0 - b.0, a.1 - b.1)
    }

    fn score(&self, (w, p): Self::Stats) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let n = w - p;
        // minus weighted Gini impurity
        (p * p + n * n) / w - w
    }

    fn weight(s: Self::Stats) -> f64 {
        s.0
    }

    fn leaf_value(&self, (w, p): Self::Stats) -> f64 {
        if w > 0.0 {
            p / w
        } else {
            0.5
        }
    }

    fn is_pure(&self, (w, p): Self::Stats) -> bool {
        p <= 0.0 || p >= w
    }
}

/// Second-order boosting criterion with L2 leaf shrinkage.
pub struct Newton<'a> {
    pub g: &'a [f64],
    pub h: &'a [f64],
    pub lambda: f64,
}

impl Criterion for Newton<'_> {
    /// (gradient sum, hessian sum, rows)
    type Stats = (f64, f64, f64);

    fn row(&self, i: usize) -> Self::Stats {
        (self.g[i], self.h[i], 1.0)
    }

    fn add(a: Self::Stats, b: Self::Stats) -> Self::Stats {
        (a.0 + b.0, a.1 + b.1, a.2 + b.2)
    }

    fn sub(a: Self::Stats, b: Self::Stats) -> Self::Stats {
        (a.0 - b.0, a.1 - b.1, a.2 - b.2)
    }

    fn score(&self, (g, h, _): Self::Stats) -> f64 {
        g * g / (h + self.lambda).max(1e-12)
    }

    fn weight(s: Self::Stats) -> f64 {
        s.2
    }

    fn leaf_value(&self, (g, h, _): Self::Stats) -> f64 {
        -g / (h + self.lambda).max(1e-12)
    }

    fn is_pure(&self, _: Self::Stats) -> bool {
        false
    }
}

pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: f64,
    /// Features tried per node; `None` means all.
    pub mtry: Option<usize>,
}

pub struct Grown {
    pub tree: Tree,
    /// Total gain credited to each feature.
    pub importance: Vec<f64>,
}

struct Builder<'a, C: Criterion> {
    x: &'a [Vec<f64>],
    crit: &'a C,
    params: &'a TreeParams,
    d: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    rng: Option<&'a mut StreamRng>,
    order: Vec<usize>,
}

impl<C: Criterion> Builder<'_, C> {
    fn stats(&self, idx: &[usize]) -> C::Stats {
        idx.iter()
            .fold(C::Stats::default(), |acc, &i| C::add(acc, self.crit.row(i)))
    }

    fn candidates(&mut self) -> Vec<usize> {
        match (self.params.mtry, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < self.d => {
                let mut all: Vec<usize> = (0..self.d).collect();
                for k in 0..m {
                    let j = rng.random_range(k..self.d);
                    all.swap(k, j);
                }
                let mut picked = all[..m].to_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..self.d).collect(),
        }
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> u32 {
        let total = self.stats(&idx);
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            feature: LEAF,
            threshold: 0.0,
            left: LEAF,
            right: LEAF,
            value: self.crit.leaf_value(total),
        });
        let min_leaf = self.params.min_leaf;
        if depth >= self.params.max_depth
            || C::weight(total) < 2.0 * min_leaf
            || self.crit.is_pure(total)
        {
            return id;
        }
        let parent = self.crit.score(total);
        let mut best: Option<(f64, usize, f64)> = None;
        for f in self.candidates() {
            let x = self.x;
            self.order.clear();
            self.order.extend_from_slice(&idx);
            self.order
                .sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            let mut left = C::Stats::default();
            for k in 0..self.order.len() - 1 {
                let i = self.order[k];
                left = C::add(left, self.crit.row(i));
                let (v, next) = (x[i][f], x[self.order[k + 1]][f]);
                if v == next {
                    continue;
                }
                let right = C::sub(total, left);
                if C::weight(left) < min_leaf || C::weight(right) < min_leaf {
                    continue;
                }
                let gain = self.crit.score(left) + self.crit.score(right) - parent;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, v));
                }
            }
        }
        let Some((gain, f, thr)) = best else {
            return id;
        };
        self.importance[f] += gain;
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][f] <= thr);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        let node = &mut self.nodes[id as usize];
        node.feature = f as u32;
        node.threshold = thr;
        node.left = left;
        node.right = right;
        id
    }
}

/// Grows a tree on rows `idx` of `x`.
pub fn grow<C: Criterion>(
    x: &[Vec<f64>],
    idx: Vec<usize>,
    crit: &C,
    params: &TreeParams,
    rng: Option<&mut StreamRng>,
) -> Grown {
    let d = x.first().map_or(0, Vec::len);
    let mut b = Builder {
        x,
        crit,
        params,
        d,
        nodes: Vec::new(),
        importance: vec![0.0; d],
        rng,
        order: Vec::with_capacity(idx.len()),
    };
    b.build(idx, 0);
    Grown {
        tree: Tree { nodes: b.nodes },
        importance: b.importance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_tree_separates_a_threshold() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![(i % 3) as f64, i as f64]).collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 6).collect();
        let w = vec![1.0; 10];
        let crit = Gini { y: &y, w: &w };
        let params = TreeParams {
            max_depth: usize::MAX,
            min_leaf: 1.0,
            mtry: None,
        };
        let g = grow(&x, (0..10).collect(), &crit, &params, None);
        assert_eq!(g.tree.depth(), 1);
        assert_eq!(g.tree.nodes[0].feature, 1);
        assert_eq!(g.tree.nodes[0].threshold, 5.0);
        assert_eq!(g.tree.predict(&[0.0, 5.5]), 1.0);
        assert_eq!(g.tree.predict(&[0.0, 5.0]), 0.0);
        assert!(g.importance[1] > 0.0 && g.importance[0] == 0.0);
    }

    #[test]
    fn depth_limit_is_respected() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..16).map(|i| i % 2 == 0).collect();
        let w = vec![1.0; 16];
        let params = TreeParams {
            max_depth: 2,
            min_leaf: 1.0,
            mtry: None,
        };
        let g = grow(&x, (0..16).collect(), &Gini { y: &y, w: &w }, &params, None);
        assert!(g.tree.depth() <= 2);
    }
}
