mod common;

use common::*;
use proptest::prelude::*;
use qfilter::stats::*;

#[test]
fn binomial_recurrence_matches_closed_form() {
    for n in [1, 2, 5, 17, 41] {
        for p in [0.0, 0.1, 0.5, 0.77, 1.0] {
            for t in 0..=n {
                let a = binomial_tail_at_least(n, t, p);
                let b = binomial_tail_naive(n, t, p);
                assert!((a - b).abs() < 1e-12, "n={n} t={t} p={p}");
            }
        }
    }
    let pmf = binomial_pmf(10, 0.3);
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

fn median_law_by_enumeration(support: &[(f64, f64)], r: usize) -> Vec<(f64, f64)> {
    let n = support.len();
    let mut out: Vec<(f64, f64)> = support.iter().map(|&(v, _)| (v, 0.0)).collect();
    let total = n.pow(r as u32);
    for code in 0..total {
        let mut c = code;
        let mut vals = Vec::with_capacity(r);
        let mut prob = 1.0;
        for _ in 0..r {
            let i = c % n;
            c /= n;
            vals.push(support[i].0);
            prob *= support[i].1;
        }
        let med = median(&vals);
        out.iter_mut().find(|(v, _)| *v == med).unwrap().1 += prob;
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[test]
fn median_law_matches_enumeration() {
    let support = [(-0.5, 0.2), (0.1, 0.5), (0.3, 0.25), (0.9, 0.05)];
    for r in [1, 3, 5, 7] {
        let fast = median_distribution(&support, r);
        let slow = median_law_by_enumeration(&support, r);
        for ((v1, p1), (v2, p2)) in fast.iter().zip(&slow) {
            assert_eq!(v1, v2);
            assert!((p1 - p2).abs() < 1e-12, "r={r}");
        }
    }
}

#[test]
fn median_law_merges_equal_values() {
    let law = median_distribution(&[(0.5, 0.3), (0.5, 0.2), (1.0, 0.5)], 3);
    assert_eq!(law.len(), 2);
    assert!((law.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn median_law_is_a_distribution(ps in prop::collection::vec(0.01f64..1.0, 1..8), r in 0usize..6) {
        let total: f64 = ps.iter().sum();
        let support: Vec<(f64, f64)> = ps.iter().enumerate().map(|(i, p)| (i as f64, p / total)).collect();
        let law = median_distribution(&support, 2 * r + 1);
        prop_assert!((law.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn binomial_tail_is_monotone_in_p(n in 1usize..40, t in 0usize..40, p in 0.0f64..0.99) {
        let t = t.min(n);
        prop_assert!(binomial_tail_at_least(n, t, p) <= binomial_tail_at_least(n, t, p + 0.01) + 1e-12);
    }
}
