/// Benjamini-Hochberg step-up adjustment, returned in input order.
/// Non-finite inputs stay non-finite and are left out of the family.
pub fn bh_fdr(p_values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..p_values.len())
        .filter(|&i| p_values[i].is_finite())
        .collect();
    let m = idx.len();
    let mut out = p_values.to_vec();
    if m == 0 {
        return out;
    }
    idx.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));
    let mut running = 1.0f64;
    for rank in (1..=m).rev() {
        let i = idx[rank - 1];
        let adj = (p_values[i] * m as f64 / rank as f64).max(p_values[i]);
        running = running.min(adj);
        out[i] = running.min(1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(bh_fdr(&[0.03]), vec![0.03]);
        let adj = bh_fdr(&[0.01, 0.02, 0.03, 0.04]);
        for a in adj {
            assert!((a - 0.04).abs() < 1e-15);
        }
        assert_eq!(bh_fdr(&[0.9, 0.8]), vec![0.9, 0.9]);
        assert!(bh_fdr(&[]).is_empty());
    }

    #[test]
    fn second_pass_is_stable_only_on_flat_inputs() {
        let flat = bh_fdr(&[0.01, 0.02, 0.03, 0.04]);
        assert_eq!(bh_fdr(&flat), flat);
        assert_eq!(bh_fdr(&[1.0, 1.0, 1.0]), vec![1.0, 1.0, 1.0]);
        let once = bh_fdr(&[0.01, 0.5]);
        assert_eq!(once, vec![0.02, 0.5]);
        assert_eq!(bh_fdr(&once), vec![0.04, 0.5]);
    }

    proptest! {
        #[test]
        fn dominates_and_permutes(ps in prop::collection::vec(0.0f64..=1.0, 1..40), rot in 0usize..40) {
            let adj = bh_fdr(&ps);
            for (a, p) in adj.iter().zip(&ps) {
                prop_assert!(*a >= *p && *a <= 1.0);
            }
            let k = rot % ps.len();
            let mut rotated = ps.clone();
            rotated.rotate_left(k);
            let mut expect = adj.clone();
            expect.rotate_left(k);
            prop_assert_eq!(bh_fdr(&rotated), expect);
        }

        #[test]
        fn idempotent_on_adjusted(ps in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let once = bh_fdr(&ps);
            // adjusted values are monotone in the raw order, so a second
            // pass can only leave them alone or scale them up
            let twice = bh_fdr(&once);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!(*b >= *a);
            }
        }
    }
}
