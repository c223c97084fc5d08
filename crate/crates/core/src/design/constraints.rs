use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::exec::{map_indexed, Workers};
use crate::sampling::{enumerate_transition_set_sampled, SamplingSet};
use crate::symfunc::{exact_levels, same_output, FunctionSpec};
use crate::Limits;

/// Distance between superimposed points. Only squared Euclidean distance
/// is provided; the solver's gradient assumes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    #[default]
    SquaredEuclidean,
}

impl DistanceMetric {
    pub fn eval(self, a: Complex64, b: Complex64) -> f64 {
        match self {
            DistanceMetric::SquaredEuclidean => (a - b).norm_sqr(),
        }
    }

    /// `κ_ℓ = D(x_1, x_2) / D(ℓ x_1, ℓ x_2)`.
    pub fn kappa(self, ell: u32) -> f64 {
        match self {
            DistanceMetric::SquaredEuclidean => 1.0 / (ell as f64 * ell as f64),
        }
    }
}

/// `D(r_left, r_right) ≥ λ · margin`, where `r_v = Σ_j v_j x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub margin: f64,
    /// Number of nodes moving together (`ℓ`) for reduced constraints; 1 for
    /// full ones.
    pub scale: u32,
}

impl Constraint {
    /// `left - right` as signed coefficients.
    pub fn coefficients(&self) -> Vec<i64> {
        self.left.iter().zip(&self.right).map(|(&l, &r)| l as i64 - r as i64).collect()
    }

    pub fn superposition(counts: &[u32], points: &[Complex64]) -> Complex64 {
        counts.iter().zip(points).map(|(&c, &x)| x * c as f64).sum()
    }

    pub fn distance(&self, points: &[Complex64]) -> f64 {
        DistanceMetric::SquaredEuclidean
            .eval(Self::superposition(&self.left, points), Self::superposition(&self.right, points))
    }

    pub fn ratio(&self, points: &[Complex64]) -> f64 {
        self.distance(points) / self.margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintForm {
    /// Every pair of histograms in Ω_{p'}.
    Full { p: u32, p_prime: u32 },
    /// One constraint per symbol pair, from transitions within Ω_p.
    Reduced { p: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub q: usize,
    pub form: ConstraintForm,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// One constraint per unordered pair of histograms in Ω_{p'} whose outputs
/// differ, with margin `|g(h) - g(h')|²`. `p_prime` defaults to `p` and
/// must not exceed it.
pub fn build_constraints_full(
    f: &FunctionSpec,
    k: u32,
    q: usize,
    p: u32,
    p_prime: Option<u32>,
    levels: &[f64],
    limits: &Limits,
) -> Result<ConstraintSet> {
    let pp = p_prime.unwrap_or(p);
    if pp == 0 || pp > p {
        return argument(format!("need 1 ≤ p' ≤ p, got p' = {pp}, p = {p}"));
    }
    let set = SamplingSet::enumerate(k, q, pp, limits)?;
    let n = set.len() as u64;
    limits
        .check(&(n * n.saturating_sub(1) / 2).into(), || format!("histogram pairs of Ω_{pp} for K = {k}, q = {q}"))?;
    let values = set.histograms().iter().map(|h| f.eval_on_histogram(h, levels)).collect::<Result<Vec<_>>>()?;
    let exact = exact_levels(f, levels);
    let hs = set.histograms();
    let mut constraints = Vec::new();
    for a in 0..hs.len() {
        for b in a + 1..hs.len() {
            if same_output(values[a], values[b], exact) {
                continue;
            }
            let d = values[a] - values[b];
            constraints.push(Constraint {
                left: hs[a].counts().to_vec(),
                right: hs[b].counts().to_vec(),
                margin: d * d,
                scale: 1,
            });
        }
    }
    Ok(ConstraintSet { q, form: ConstraintForm::Full { p, p_prime: pp }, constraints })
}

/// One constraint per symbol pair `(i, j)`:
/// `D(x_i, x_j) ≥ λ · max_ℓ κ_ℓ · max_{S^ℓ_{i,j}} |g(c) - g(c')|²`.
pub fn build_constraints_reduced(
    f: &FunctionSpec,
    k: u32,
    q: usize,
    levels: &[f64],
    limits: &Limits,
) -> Result<ConstraintSet> {
    build_constraints_reduced_sampled(f, k, q, 1, levels, limits)
}

/// [`build_constraints_reduced`] restricted to transitions inside Ω_p
/// (`ℓ ∈ {p, 2p, …, K}`).
pub fn build_constraints_reduced_sampled(
    f: &FunctionSpec,
    k: u32,
    q: usize,
    p: u32,
    levels: &[f64],
    limits: &Limits,
) -> Result<ConstraintSet> {
    let metric = DistanceMetric::SquaredEuclidean;
    let pairs: Vec<(usize, usize)> = (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))).collect();
    let exact = exact_levels(f, levels);
    let found = map_indexed(pairs.len(), Workers::Auto, |idx| -> Result<Option<Constraint>> {
        let (i, j) = pairs[idx];
        let t = enumerate_transition_set_sampled(k, q, i, j, p, limits)?;
        let mut best: Option<(f64, u32)> = None;
        for (&ell, list) in &t.per_level {
            for (a, b) in list {
                let (ga, gb) = (f.eval_on_histogram(a, levels)?, f.eval_on_histogram(b, levels)?);
                if same_output(ga, gb, exact) {
                    continue;
                }
                let m = metric.kappa(ell) * (ga - gb) * (ga - gb);
                if best.is_none_or(|(bm, _)| m > bm) {
                    best = Some((m, ell));
                }
            }
        }
        Ok(best.map(|(margin, ell)| {
            let mut left = vec![0; q];
            let mut right = vec![0; q];
            left[i] = 1;
            right[j] = 1;
            Constraint { left, right, margin, scale: ell }
        }))
    });
    let mut constraints = Vec::new();
    for c in found {
        if let Some(c) = c? {
            constraints.push(c);
        }
    }
    Ok(ConstraintSet { q, form: ConstraintForm::Reduced { p }, constraints })
}
