use serde::Serialize;
use statrs::function::erf::erfc;

/// Largest combined sample size handled by exact enumeration.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Midranks of `values`, doubled so they stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<i64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0i64; values.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && values[idx[e + 1]] == values[idx[k]] {
            e += 1;
        }
        // ranks k+1 ..= e+1 averaged, times two
        let twice = (k + 1 + e + 1) as i64;
        for &i in &idx[k..=e] {
            ranks[i] = twice;
        }
        k = e + 1;
    }
    ranks
}

fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut k = 0;
    while k < v.len() {
        let mut e = k;
        while e + 1 < v.len() && v[e + 1] == v[k] {
            e += 1;
        }
        out.push(e - k + 1);
        k = e + 1;
    }
    out
}

/// Counts subsets of size `k` of `ranks` whose sum `s` gives
/// `|2 * (s - base) - target_mid| >= observed`, returning (hits, total).
fn enumerate(ranks: &[i64], k: usize, base: i64, mid: i64, observed: i64) -> (u64, u64) {
    fn rec(
        ranks: &[i64],
        start: usize,
        left: usize,
        sum: i64,
        f: &mut dyn FnMut(i64),
    ) {
        if left == 0 {
            f(sum);
            return;
        }
        for i in start..=ranks.len() - left {
            rec(ranks, i + 1, left - 1, sum + ranks[i], f);
        }
    }
    let mut hits = 0u64;
    let mut total = 0u64;
    rec(ranks, 0, k, 0, &mut |s| {
        total += 1;
        // s is a doubled rank sum, so s - base is 2U
        if (s - base - mid).abs() >= observed {
            hits += 1;
        }
    });
    (hits, total)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test. The statistic is U for
/// sample `a`. Exact permutation p-value when the pooled size is at most
/// [`EXACT_MAX_N`], otherwise the tie-corrected normal approximation with
/// continuity correction.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> TestOutcome {
    let (na, nb) = (a.len(), b.len());
    if na == 0 || nb == 0 {
        return TestOutcome {
            statistic: f64::NAN,
            p_value: f64::NAN,
        };
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_ranks(&pooled);
    let ra2: i64 = ranks[..na].iter().sum();
    let base = (na * (na + 1)) as i64;
    let u2 = ra2 - base;
    let mid = (na * nb) as i64;
    let u = u2 as f64 / 2.0;
    let n = na + nb;
    if n <= EXACT_MAX_N {
        let observed = (u2 - mid).abs();
        let (hits, total) = enumerate(&ranks, na, base, mid, observed);
        return TestOutcome {
            statistic: u,
            p_value: hits as f64 / total as f64,
        };
    }
    rank_sum_normal(u, na, nb, &tie_sizes(&pooled))
}

/// Normal approximation used for large samples.
pub fn rank_sum_normal(u: f64, na: usize, nb: usize, ties: &[usize]) -> TestOutcome {
    let (na_f, nb_f) = (na as f64, nb as f64);
    let n = na_f + nb_f;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = na_f * nb_f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - na_f * nb_f / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    TestOutcome {
        statistic: u,
        p_value,
    }
}

/// Pearson chi-square on a 2x2 table `[[a, b], [c, d]]`, no continuity
/// correction, one degree of freedom. `None` when a margin is zero.
pub fn chi_square_test(table: [[u64; 2]; 2]) -> Option<TestOutcome> {
    let [[a, b], [c, d]] = table.map(|r| r.map(|v| v as f64));
    let n = a + b + c + d;
    let margins = (a + b) * (c + d) * (a + c) * (b + d);
    if margins == 0.0 {
        return None;
    }
    let chi2 = n * (a * d - b * c).powi(2) / margins;
    Some(TestOutcome {
        statistic: chi2,
        p_value: erfc((chi2 / 2.0).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn rank_sum_examples() {
        let r = rank_sum_test(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(r.statistic, 0.0);
        assert_abs_diff_eq!(r.p_value, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(rank_sum_test(&[5.0; 3], &[5.0; 3]).p_value, 1.0);
        assert_eq!(rank_sum_test(&[5.0; 20], &[5.0; 20]).p_value, 1.0);
    }

    #[test]
    fn rank_sum_ties_midranks() {
        assert_eq!(doubled_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![7, 2, 7, 4]);
        let r = rank_sum_test(&[1.0, 2.0, 2.0], &[2.0, 3.0]);
        // ranks 1, 3, 3 for a
        assert_eq!(r.statistic, 7.0 - 6.0);
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square_test([[10, 10], [10, 10]]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = chi_square_test([[20, 10], [10, 20]]).unwrap();
        assert_abs_diff_eq!(r.statistic, 20.0 / 3.0, epsilon = 1e-12);
        // mpmath erfc(sqrt(x / 2)) at 40 digits; statrs erfc is good to ~1e-11
        assert_abs_diff_eq!(r.p_value, 0.009823274507519248, epsilon = 1e-10);
        let r = chi_square_test([[1, 0], [0, 1]]).unwrap();
        assert_abs_diff_eq!(r.statistic, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.p_value, 0.15729920705028513, epsilon = 1e-10);
        assert!(chi_square_test([[0, 0], [3, 4]]).is_none());
    }

    #[test]
    fn chi_square_matches_cell_sum_form() {
        for table in [[[12u64, 5], [7, 9]], [[30, 1], [2, 40]], [[3, 8], [6, 2]]] {
            let r = chi_square_test(table).unwrap();
            let t = table.map(|r| r.map(|v| v as f64));
            let n: f64 = t.iter().flatten().sum();
            let mut x2 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let e = (t[i][0] + t[i][1]) * (t[0][j] + t[1][j]) / n;
                    x2 += (t[i][j] - e).powi(2) / e;
                }
            }
            assert_abs_diff_eq!(r.statistic, x2, epsilon = 1e-9);
            let sf = 1.0 - ChiSquared::new(1.0).unwrap().cdf(x2);
            assert_abs_diff_eq!(r.p_value, sf, epsilon = 1e-9);
        }
    }

    #[test]
    fn null_p_values_are_uniform() {
        use rand_distr::{Distribution, StandardNormal};
        let mut ps: Vec<f64> = (0..1000u64)
            .map(|seed| {
                let mut rng = crate::rng::stream(seed, &[77]);
                let mut draw = |n: usize| -> Vec<f64> {
                    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
                };
                let a = draw(50);
                let b = draw(50);
                rank_sum_test(&a, &b).p_value
            })
            .collect();
        ps.sort_by(f64::total_cmp);
        let n = ps.len() as f64;
        let d = ps
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64 / n - p).max(p - i as f64 / n))
            .fold(0.0, f64::max);
        // Kolmogorov-Smirnov critical value at alpha = 0.01
        assert!(d < 1.63 / n.sqrt(), "KS distance {d}");
    }

    proptest! {
        // Holds for groups of at least five; smaller groups drift further.
        #[test]
        fn normal_tracks_exact_for_balanced_small_samples(
            (na, xs) in (5usize..=7).prop_flat_map(|na| {
                (Just(na), prop::collection::hash_set(0u32..10_000, 10..=12))
            })
        ) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            prop_assume!(xs.len() - na >= 5);
            let (a, b) = xs.split_at(na);
            let exact = rank_sum_test(a, b);
            let approx = rank_sum_normal(exact.statistic, a.len(), b.len(), &vec![1; xs.len()]);
            prop_assert!((exact.p_value - approx.p_value).abs() <= 0.02,
                "exact {} approx {}", exact.p_value, approx.p_value);
        }

        #[test]
        fn u_statistics_sum_to_product(
            a in prop::collection::vec(0i32..20, 1..15),
            b in prop::collection::vec(0i32..20, 1..15),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ua = rank_sum_test(&a, &b);
            let ub = rank_sum_test(&b, &a);
            prop_assert_eq!(ua.statistic + ub.statistic, (a.len() * b.len()) as f64);
            prop_assert!((ua.p_value - ub.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ua.p_value));
        }
    }
}
