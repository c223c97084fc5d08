use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use pyramid_oac::sampling::{
    enumerate_transition_set, enumerate_transition_set_sampled, epsilon_bound, epsilon_exact, majority_aggregate,
    omega_cardinality, sample_output, tradeoff_curve, transition_cardinality, SamplingSet,
};
use pyramid_oac::symfunc::{index_levels, midpoint_levels};
use pyramid_oac::{FunctionSpec, Limits};

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

proptest! {
    #[test]
    fn enumeration_matches_closed_form(k in 1u32..=9, q in 2usize..=5, p in 1u32..=9) {
        prop_assume!(p <= k && k % p == 0);
        let set = SamplingSet::enumerate(k, q, p, &Limits::default()).unwrap();
        prop_assert_eq!(BigUint::from(set.len()), omega_cardinality(k, q, p));
        prop_assert_eq!(BigUint::from(set.len()), binom((k / p + q as u32 - 1) as u64, q as u64 - 1));
        let hs = set.histograms();
        for h in hs {
            prop_assert_eq!(h.nodes(), k);
            prop_assert!(h.counts().iter().all(|c| c % p == 0));
        }
        // ascending and distinct
        prop_assert!(hs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sets_are_nested(d in 1u32..=4, m in 1u32..=3, n in 1u32..=3, q in 2usize..=4) {
        let (p, k) = (d * m, d * m * n);
        let limits = Limits::default();
        let outer: BTreeSet<_> = SamplingSet::enumerate(k, q, d, &limits).unwrap().histograms().iter().cloned().collect();
        for h in SamplingSet::enumerate(k, q, p, &limits).unwrap().histograms() {
            prop_assert!(outer.contains(h));
        }
    }

    #[test]
    fn transition_counts(k in 1u32..=7, q in 2usize..=5, i in 0usize..5, j in 0usize..5) {
        prop_assume!(i < q && j < q && i != j);
        let t = enumerate_transition_set(k, q, i, j, &Limits::default()).unwrap();
        prop_assert_eq!(BigUint::from(t.total()), transition_cardinality(k, q));
        for (&ell, pairs) in &t.per_level {
            prop_assert_eq!(BigUint::from(pairs.len()), binom((k - ell) as u64 + q as u64 - 1, q as u64 - 1));
            for (a, b) in pairs {
                prop_assert!(a.counts()[i] >= ell && b.counts()[j] >= ell);
                let moved: Vec<i64> = a.counts().iter().zip(b.counts()).map(|(&x, &y)| x as i64 - y as i64).collect();
                for (n, &m) in moved.iter().enumerate() {
                    let want = if n == i { ell as i64 } else if n == j { -(ell as i64) } else { 0 };
                    prop_assert_eq!(m, want);
                }
            }
        }
    }

    #[test]
    fn full_enumeration_has_no_sampling_error(k in 1u32..=6, q in 2usize..=4) {
        let limits = Limits::default();
        let levels = midpoint_levels(q).unwrap();
        for f in [FunctionSpec::sum(), FunctionSpec::product(), FunctionSpec::max(), FunctionSpec::geometric_mean()] {
            prop_assert_eq!(epsilon_exact(&f, k, q, 1, &levels, &limits).unwrap(), 0.0);
        }
    }

    #[test]
    fn sampling_error_within_bound(k in 1u32..=8, q in 2usize..=4, p in 1u32..=8) {
        prop_assume!(p <= k && k % p == 0);
        let limits = Limits::default();
        let levels = midpoint_levels(q).unwrap();
        for f in [FunctionSpec::arithmetic_mean(), FunctionSpec::max()] {
            let e = epsilon_exact(&f, k, q, p, &levels, &limits).unwrap();
            prop_assert!(e <= epsilon_bound(&f, k, q, p).unwrap() + 1e-12);
        }
    }
}

#[test]
fn sampled_transitions_stay_in_omega() {
    let limits = Limits::default();
    let t = enumerate_transition_set_sampled(6, 3, 0, 2, 2, &limits).unwrap();
    assert_eq!(t.per_level.keys().copied().collect::<Vec<_>>(), vec![2, 4, 6]);
    for (a, b) in t.per_level.values().flatten() {
        assert!(a.counts().iter().chain(b.counts()).all(|c| c % 2 == 0));
    }
    assert!(enumerate_transition_set(3, 3, 1, 1, &limits).is_err());
}

#[test]
fn enumeration_cap_is_enforced() {
    let limits = Limits { enumeration_cap: 100, ..Limits::default() };
    assert!(SamplingSet::enumerate(10, 4, 1, &limits).is_err());
    assert!(SamplingSet::enumerate(10, 4, 5, &limits).is_ok());
    assert!(SamplingSet::enumerate(6, 3, 4, &limits).unwrap().is_empty());
}

#[test]
fn tradeoff_endpoints() {
    let pts = tradeoff_curve(100, 32, 1.0).unwrap();
    assert_eq!(pts.len(), 100);
    assert_eq!(pts[0].delta_norm, 1.0);
    assert!(pts.windows(2).all(|w| w[1].delta_norm <= w[0].delta_norm && w[1].epsilon > w[0].epsilon));
    let last = pts[99].delta_norm;
    let want = 32f64.ln() / pyramid_oac::combinatorics::ln_big(&binom(131, 31));
    assert!((last - want).abs() < 1e-12);
}

#[test]
fn nearest_output_prefers_lower_on_ties() {
    let range = [0.0, 1.0, 3.0];
    assert_eq!(sample_output(0.5, &range).unwrap(), 0.0);
    assert_eq!(sample_output(2.0, &range).unwrap(), 1.0);
    assert_eq!(sample_output(2.1, &range).unwrap(), 3.0);
    assert_eq!(sample_output(-4.0, &range).unwrap(), 0.0);
    assert_eq!(sample_output(9.0, &range).unwrap(), 3.0);
    assert!(sample_output(1.0, &[]).is_err());
}

#[test]
fn majority_of_tied_levels_averages() {
    let levels = index_levels(4);
    let f = FunctionSpec::sum();
    assert_eq!(majority_aggregate(&f, &[1, 1, 3], 4, &levels).unwrap(), 3.0);
    // 0 and 2 tie: mean of g(0,0,0,0) and g(2,2,2,2)
    assert_eq!(majority_aggregate(&f, &[0, 2, 0, 2], 4, &levels).unwrap(), 4.0);
}
