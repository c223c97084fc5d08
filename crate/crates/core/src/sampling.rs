//! Pyramid sampling sets, transition sets, output sampling and the
//! complexity/error metrics that trade them off.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::combinatorics::{binomial, ln_big, Compositions};
use crate::error::{argument, Error, Result};
use crate::symfunc::{exact_levels, output_range, sort_dedup, FunctionKind, FunctionSpec, Histogram};
use crate::Limits;

/// All histograms of `K` nodes over `q` levels whose entries are multiples
/// of the sampling order `p`, in ascending lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingSet {
    k: u32,
    q: usize,
    p: u32,
    histograms: Vec<Histogram>,
}

impl SamplingSet {
    /// Enumerates Ω_p.
    ///
    /// When `p` does not divide `K` no histogram qualifies; the set is empty
    /// and a warning is logged.
    pub fn enumerate(k: u32, q: usize, p: u32, limits: &Limits) -> Result<Self> {
        check_kqp(k, q, p)?;
        if k % p != 0 {
            log::warn!("sampling order p = {p} does not divide K = {k}; Ω_p is empty");
            return Ok(SamplingSet { k, q, p, histograms: Vec::new() });
        }
        let size = omega_cardinality(k, q, p);
        limits.check(&size, || format!("Ω_{p} for K = {k}, q = {q}"))?;
        let histograms = Compositions::new(k / p, q)
            .map(|c| Histogram::from_counts_unchecked(c.into_iter().map(|x| x * p).collect()))
            .collect();
        Ok(SamplingSet { k, q, p, histograms })
    }

    pub fn nodes(&self) -> u32 {
        self.k
    }

    pub fn levels(&self) -> usize {
        self.q
    }

    pub fn order(&self) -> u32 {
        self.p
    }

    pub fn histograms(&self) -> &[Histogram] {
        &self.histograms
    }

    pub fn len(&self) -> usize {
        self.histograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histograms.is_empty()
    }
}

fn check_kqp(k: u32, q: usize, p: u32) -> Result<()> {
    if k == 0 {
        return argument("K must be positive");
    }
    if q < 2 {
        return argument(format!("need q ≥ 2, got {q}"));
    }
    if p == 0 || p > k {
        return argument(format!("sampling order must satisfy 1 ≤ p ≤ K, got p = {p}, K = {k}"));
    }
    Ok(())
}

/// Exact size of Ω_p: `binom(K/p + q - 1, q - 1)` when `p | K`, else zero.
pub fn omega_cardinality(k: u32, q: usize, p: u32) -> BigUint {
    if p == 0 || k % p != 0 {
        return BigUint::default();
    }
    binomial((k / p) as u64 + q as u64 - 1, q as u64 - 1)
}

/// `binom(K - p + q, q - 1)`, the growth-rate form of |Ω_p|.
///
/// Equals [`omega_cardinality`] at `p = 1` and `p = K` and bounds it from
/// above in between. This is the quantity plotted in trade-off curves.
pub fn omega_cardinality_bound(k: u32, q: usize, p: u32) -> BigUint {
    binomial(k as u64 - p as u64 + q as u64, q as u64 - 1)
}

/// Pairs of histograms `(h, h')` where `h' = h - ℓ·e_i + ℓ·e_j`: exactly ℓ
/// nodes move from level `i` to level `j` while the rest stay put. Grouped
/// by ℓ.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSet {
    pub k: u32,
    pub q: usize,
    pub from: usize,
    pub to: usize,
    pub per_level: BTreeMap<u32, Vec<(Histogram, Histogram)>>,
}

impl TransitionSet {
    pub fn total(&self) -> usize {
        self.per_level.values().map(Vec::len).sum()
    }
}

/// Enumerates S_{i,j}, partitioned by the number ℓ of nodes that move.
pub fn enumerate_transition_set(k: u32, q: usize, from: usize, to: usize, limits: &Limits) -> Result<TransitionSet> {
    enumerate_transition_set_sampled(k, q, from, to, 1, limits)
}

/// Like [`enumerate_transition_set`] but keeps only pairs whose two
/// histograms both lie in Ω_p, so ℓ runs over `p, 2p, …, K`.
pub fn enumerate_transition_set_sampled(
    k: u32,
    q: usize,
    from: usize,
    to: usize,
    p: u32,
    limits: &Limits,
) -> Result<TransitionSet> {
    check_kqp(k, q, p)?;
    if from == to || from >= q || to >= q {
        return argument(format!("need distinct levels below q = {q}, got ({from}, {to})"));
    }
    limits.check(&transition_cardinality(k, q), || format!("transition set S_{{{from},{to}}} for K = {k}, q = {q}"))?;
    let mut per_level = BTreeMap::new();
    for ell in (p..=k).step_by(p as usize) {
        if (k - ell) % p != 0 {
            continue;
        }
        let pairs = Compositions::new((k - ell) / p, q)
            .map(|rest| {
                let rest: Vec<u32> = rest.into_iter().map(|x| x * p).collect();
                let mut left = rest.clone();
                let mut right = rest;
                left[from] += ell;
                right[to] += ell;
                (Histogram::from_counts_unchecked(left), Histogram::from_counts_unchecked(right))
            })
            .collect();
        per_level.insert(ell, pairs);
    }
    Ok(TransitionSet { k, q, from, to, per_level })
}

/// |S_{i,j}| = `binom(K + q - 1, q)`, the same for every pair `i ≠ j`.
pub fn transition_cardinality(k: u32, q: usize) -> BigUint {
    binomial(k as u64 + q as u64 - 1, q as u64)
}

/// Projects `value` onto the nearest element of a sorted output range.
/// Ties go to the smaller element.
pub fn sample_output(value: f64, range: &[f64]) -> Result<f64> {
    if range.is_empty() {
        return argument("cannot sample onto an empty output range");
    }
    let idx = range.partition_point(|&r| r < value);
    if idx == 0 {
        return Ok(range[0]);
    }
    if idx == range.len() {
        return Ok(range[idx - 1]);
    }
    let (lo, hi) = (range[idx - 1], range[idx]);
    Ok(if value - lo <= hi - value { lo } else { hi })
}

/// The majority operator on quantized inputs.
///
/// A strict plurality level `c` yields `g(c, …, c)`. When `r ≥ 2` levels
/// tie for the largest count, the result is the mean of their `r`
/// all-equal function values.
pub fn majority_aggregate(f: &FunctionSpec, chosen: &[usize], q: usize, level_values: &[f64]) -> Result<f64> {
    let h = Histogram::from_indices(chosen, q)?;
    let k = h.nodes();
    let top = *h.counts().iter().max().unwrap_or(&0);
    let winners: Vec<usize> = (0..q).filter(|&j| h.counts()[j] == top).collect();
    let mut acc = 0.0;
    for &j in &winners {
        acc += f.eval_unanimous(j, k, level_values)?;
    }
    Ok(acc / winners.len() as f64)
}

/// δ(p) = ln |𝒴_g^p|.
pub fn delta(f: &FunctionSpec, k: u32, q: usize, p: u32, levels: &[f64], limits: &Limits) -> Result<f64> {
    let range = output_range(f, k, q, p, levels, limits)?;
    if range.is_empty() {
        return argument(format!("Ω_{p} is empty for K = {k}"));
    }
    Ok((range.len() as f64).ln())
}

/// Worst-case normalized sampling error
/// `(1/K) · max_{h ∈ Ω} min_{h' ∈ Ω_p} |g(h) - g(h')|`.
pub fn epsilon_exact(f: &FunctionSpec, k: u32, q: usize, p: u32, levels: &[f64], limits: &Limits) -> Result<f64> {
    let sampled = output_range(f, k, q, p, levels, limits)?;
    if sampled.is_empty() {
        return argument(format!("Ω_{p} is empty for K = {k}"));
    }
    let full = output_range(f, k, q, 1, levels, limits)?;
    let mut worst = 0.0f64;
    for v in full {
        let nearest = sample_output(v, &sampled)?;
        worst = worst.max((v - nearest).abs());
    }
    Ok(worst / k as f64)
}

/// Tabulated closed forms of ε(p) for arithmetic mean, max and geometric
/// mean.
pub fn epsilon_bound(f: &FunctionSpec, k: u32, q: usize, p: u32) -> Result<f64> {
    let ratio = p as f64 / k as f64;
    match f.kind() {
        FunctionKind::ArithmeticMean | FunctionKind::Max => Ok(ratio),
        FunctionKind::GeometricMean => Ok(ratio * (q as f64 - 1.0)),
        _ => Err(Error::Unsupported(format!("no closed-form sampling error for '{}'", f.name()))),
    }
}

/// Error and complexity ratios of the two pyramid configurations against
/// full enumeration at `q` levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop1Ratios {
    /// `q^K` levels at `p = K`: error ratio `K / q^(K-1)`.
    pub epsilon_high_levels: f64,
    /// `qK` levels at `p = K`: error ratio 1.
    pub epsilon_scaled_levels: f64,
    /// `K ln q / ln binom(K - 1 + q, q - 1)`.
    pub delta_high_levels: f64,
    /// `ln(Kq) / ln binom(K - 1 + q, q - 1)`.
    pub delta_scaled_levels: f64,
}

pub fn prop1_ratios(k: u32, q: usize) -> Result<Prop1Ratios> {
    if k < 2 || q < 2 {
        return argument(format!("need K ≥ 2 and q ≥ 2, got K = {k}, q = {q}"));
    }
    let (kf, qf) = (k as f64, q as f64);
    let full = ln_big(&binomial(k as u64 - 1 + q as u64, q as u64 - 1));
    Ok(Prop1Ratios {
        epsilon_high_levels: kf / qf.powi(k as i32 - 1),
        epsilon_scaled_levels: 1.0,
        delta_high_levels: kf * qf.ln() / full,
        delta_scaled_levels: (kf * qf).ln() / full,
    })
}

/// One point of a complexity/error trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub p: u32,
    /// `L · p / K`.
    pub epsilon: f64,
    /// `ln binom(K - p + q, q - 1) / ln binom(K - 1 + q, q - 1)`.
    pub delta_norm: f64,
}

/// Normalized complexity against sampling error for `p = 1, …, K`, using
/// the generic bound on |Ω_p| for the complexity.
pub fn tradeoff_curve(k: u32, q: usize, lipschitz: f64) -> Result<Vec<TradeoffPoint>> {
    if k == 0 || q < 2 {
        return argument(format!("need K ≥ 1 and q ≥ 2, got K = {k}, q = {q}"));
    }
    let full = ln_big(&omega_cardinality_bound(k, q, 1));
    Ok((1..=k)
        .map(|p| TradeoffPoint {
            p,
            epsilon: lipschitz * p as f64 / k as f64,
            delta_norm: ln_big(&omega_cardinality_bound(k, q, p)) / full,
        })
        .collect())
}

/// Number of distinct outputs of `g` over an already enumerated set.
pub fn range_size(f: &FunctionSpec, set: &SamplingSet, levels: &[f64]) -> Result<usize> {
    let values = set.histograms().iter().map(|h| f.eval_on_histogram(h, levels)).collect::<Result<Vec<_>>>()?;
    Ok(sort_dedup(values, exact_levels(f, levels)).len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfunc::index_levels;

    fn hs(set: &SamplingSet) -> Vec<Vec<u32>> {
        set.histograms().iter().map(|h| h.counts().to_vec()).collect()
    }

    #[test]
    fn omega_two_nodes_four_levels() {
        let lim = Limits::default();
        let s = SamplingSet::enumerate(2, 4, 2, &lim).unwrap();
        let mut got = hs(&s);
        got.sort();
        let mut want = vec![vec![2, 0, 0, 0], vec![0, 2, 0, 0], vec![0, 0, 2, 0], vec![0, 0, 0, 2]];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(SamplingSet::enumerate(2, 4, 1, &lim).unwrap().len(), 10);
    }

    #[test]
    fn omega_at_p_equal_k_is_unanimous() {
        let s = SamplingSet::enumerate(5, 3, 5, &Limits::default()).unwrap();
        let got = hs(&s);
        assert_eq!(got, vec![vec![0, 0, 5], vec![0, 5, 0], vec![5, 0, 0]]);
    }

    #[test]
    fn non_dividing_order_is_empty() {
        let s = SamplingSet::enumerate(5, 3, 2, &Limits::default()).unwrap();
        assert!(s.is_empty());
        assert_eq!(omega_cardinality(5, 3, 2), BigUint::default());
    }

    #[test]
    fn omega_argument_and_capacity_errors() {
        let lim = Limits::default();
        assert!(matches!(SamplingSet::enumerate(3, 1, 1, &lim), Err(Error::Argument(_))));
        assert!(matches!(SamplingSet::enumerate(3, 2, 4, &lim), Err(Error::Argument(_))));
        assert!(matches!(SamplingSet::enumerate(3, 2, 0, &lim), Err(Error::Argument(_))));
        let tiny = Limits { enumeration_cap: 9, ..Limits::default() };
        match SamplingSet::enumerate(2, 4, 1, &tiny) {
            Err(Error::Capacity { cap, .. }) => assert_eq!(cap, 9),
            other => panic!("expected a capacity error, got {other:?}"),
        }
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(omega_cardinality(2, 4, 2), BigUint::from(4u32));
        assert_eq!(omega_cardinality(2, 4, 1), BigUint::from(10u32));
        assert_eq!(omega_cardinality(100, 4, 100), BigUint::from(4u32));
        assert_eq!(omega_cardinality_bound(100, 4, 100), BigUint::from(4u32));
        // the bound is tight only at the ends
        assert_eq!(omega_cardinality(4, 2, 2), BigUint::from(3u32));
        assert_eq!(omega_cardinality_bound(4, 2, 2), BigUint::from(4u32));
    }

    #[test]
    fn transition_examples() {
        let lim = Limits::default();
        assert_eq!(enumerate_transition_set(2, 2, 0, 1, &lim).unwrap().total(), 3);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let t = enumerate_transition_set(2, 4, i, j, &lim).unwrap();
                    assert_eq!(t.total(), 5);
                    assert_eq!(t.per_level[&2].len(), 1);
                }
            }
        }
        assert_eq!(transition_cardinality(2, 2), BigUint::from(3u32));
        assert_eq!(transition_cardinality(2, 4), BigUint::from(5u32));
        assert_eq!(transition_cardinality(1, 2), BigUint::from(1u32));
        assert!(enumerate_transition_set(2, 3, 1, 1, &lim).is_err());
    }

    #[test]
    fn sampled_transitions_stay_in_omega_p() {
        let t = enumerate_transition_set_sampled(4, 3, 0, 2, 2, &Limits::default()).unwrap();
        assert_eq!(t.per_level.keys().copied().collect::<Vec<_>>(), vec![2, 4]);
        for (l, r) in t.per_level.values().flatten() {
            assert!(l.counts().iter().chain(r.counts()).all(|c| c % 2 == 0));
        }
    }

    #[test]
    fn sample_output_examples() {
        let r = [0.0, 1.0, 4.0, 9.0];
        assert_eq!(sample_output(4.0, &r).unwrap(), 4.0);
        assert_eq!(sample_output(2.4, &r).unwrap(), 1.0);
        assert_eq!(sample_output(2.5, &r).unwrap(), 1.0);
        assert_eq!(sample_output(-3.0, &r).unwrap(), 0.0);
        assert_eq!(sample_output(30.0, &r).unwrap(), 9.0);
        assert!(sample_output(1.0, &[]).is_err());
    }

    #[test]
    fn majority_examples() {
        let lv = index_levels(4);
        let prod = FunctionSpec::product();
        assert_eq!(majority_aggregate(&prod, &[2, 2, 2], 4, &lv).unwrap(), 8.0);
        assert_eq!(majority_aggregate(&prod, &[0, 3], 4, &lv).unwrap(), 4.5);
        let mean = FunctionSpec::arithmetic_mean();
        assert_eq!(majority_aggregate(&mean, &[1, 1, 2], 4, &lv).unwrap(), 1.0);
    }

    #[test]
    fn delta_examples() {
        let lim = Limits::default();
        let lv = index_levels(4);
        let d = delta(&FunctionSpec::product(), 2, 4, 2, &lv, &lim).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-15);
        let c = FunctionSpec::constant(2, 4, 3.0).unwrap();
        assert_eq!(delta(&c, 2, 4, 1, &lv, &lim).unwrap(), 0.0);
        // sum on index values is injective on the diagonal
        let d = delta(&FunctionSpec::sum(), 3, 5, 3, &index_levels(5), &lim).unwrap();
        assert!((d - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn epsilon_examples() {
        let lim = Limits::default();
        let lv = index_levels(3);
        for f in [FunctionSpec::sum(), FunctionSpec::product(), FunctionSpec::max()] {
            assert_eq!(epsilon_exact(&f, 3, 3, 1, &lv, &lim).unwrap(), 0.0);
        }
        let c = FunctionSpec::constant(4, 3, 2.0).unwrap();
        assert_eq!(epsilon_exact(&c, 4, 3, 2, &lv, &lim).unwrap(), 0.0);
    }

    #[test]
    fn epsilon_bound_examples() {
        assert_eq!(epsilon_bound(&FunctionSpec::arithmetic_mean(), 100, 4, 10).unwrap(), 0.1);
        assert_eq!(epsilon_bound(&FunctionSpec::max(), 7, 4, 7).unwrap(), 1.0);
        assert_eq!(epsilon_bound(&FunctionSpec::geometric_mean(), 16, 4, 8).unwrap(), 1.5);
        assert!(matches!(epsilon_bound(&FunctionSpec::sum(), 4, 4, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn prop1_examples() {
        let r = prop1_ratios(5, 2).unwrap();
        assert_eq!(r.epsilon_high_levels, 0.3125);
        assert_eq!(r.epsilon_scaled_levels, 1.0);
        let r = prop1_ratios(2, 2).unwrap();
        assert!((r.delta_high_levels - 2.0 * 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!(prop1_ratios(1, 2).is_err());
    }

    #[test]
    fn tradeoff_endpoints_and_shape() {
        let c = tradeoff_curve(100, 4, 1.0).unwrap();
        assert_eq!(c.len(), 100);
        assert_eq!(c[0].delta_norm, 1.0);
        let last = c[99];
        let expect = 4f64.ln() / ln_big(&binomial(103, 3));
        assert!((last.delta_norm - expect).abs() < 1e-15);
        assert_eq!(last.epsilon, 1.0);
        assert!(c.windows(2).all(|w| w[1].delta_norm <= w[0].delta_norm));
    }
}
