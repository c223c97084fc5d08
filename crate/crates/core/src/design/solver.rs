//! Multi-start projected gradient ascent on an annealed soft-min of the
//! constraint ratios `D(r_i, r_j) / margin`.
//!
//! Every constraint is a zero-sum integer combination of the symbols, so
//! the objective ignores translations and is homogeneous of degree two.
//! Iterates are therefore kept centred with `Σ |x_i|² = 1`, which is the
//! projection onto the unit ball for any point that could still improve.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::constraints::ConstraintSet;
use crate::constellation::{Constellation, PowerConvention};
use crate::error::{argument, Result};
use crate::exec::{map_indexed, Workers};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub temperature_start: f64,
    pub temperature_end: f64,
    pub step_start: f64,
    pub step_end: f64,
    /// Start restart 0 from equispaced real points.
    pub pam_start: bool,
    /// Extra starting points, run before the PAM and random restarts.
    #[serde(skip)]
    pub warm_starts: Vec<Vec<Complex64>>,
    #[serde(skip)]
    pub workers: Workers,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 16,
            iterations: 2000,
            seed: 0,
            temperature_start: 1.0,
            temperature_end: 1e-3,
            step_start: 0.05,
            step_end: 1e-4,
            pam_start: true,
            warm_starts: Vec::new(),
            workers: Workers::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub restarts: usize,
    pub iterations: usize,
    pub final_temperature: f64,
    /// Index of the winning start (warm starts first, then PAM, then random).
    pub best_restart: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    /// Centred points with `Σ |x_i|² = 1`.
    pub constellation: Constellation,
    /// `min_c D_c / margin_c`, recomputed from `constellation`.
    pub lambda_star: f64,
    /// Constraints attaining the minimum (relative slack `1e-9`).
    pub active_pairs: Vec<usize>,
    pub diagnostics: Diagnostics,
}

/// `min_c D(r_c) / margin_c` over a constraint set.
pub fn lambda_of(cs: &ConstraintSet, points: &[Complex64]) -> f64 {
    cs.constraints.iter().map(|c| c.ratio(points)).fold(f64::INFINITY, f64::min)
}

/// Constraints with parallel coefficient vectors collapse into the one
/// requiring the largest margin per unit direction.
struct Problem {
    q: usize,
    coeffs: Vec<f64>,
    inv_margin: Vec<f64>,
}

impl Problem {
    fn new(cs: &ConstraintSet) -> Self {
        let mut best: HashMap<Vec<i64>, f64> = HashMap::new();
        let mut order: Vec<Vec<i64>> = Vec::new();
        for c in &cs.constraints {
            let mut d = c.coefficients();
            let g = d.iter().fold(0i64, |acc, &v| gcd(acc, v.abs()));
            if g == 0 {
                continue;
            }
            let sign = if d.iter().find(|&&v| v != 0).copied().unwrap_or(1) < 0 { -1 } else { 1 };
            for v in d.iter_mut() {
                *v = *v / g * sign;
            }
            let m = c.margin / (g * g) as f64;
            match best.get_mut(&d) {
                Some(prev) => *prev = prev.max(m),
                None => {
                    order.push(d.clone());
                    best.insert(d, m);
                }
            }
        }
        let mut coeffs = Vec::with_capacity(order.len() * cs.q);
        let mut inv_margin = Vec::with_capacity(order.len());
        for d in &order {
            coeffs.extend(d.iter().map(|&v| v as f64));
            inv_margin.push(1.0 / best[d]);
        }
        Problem { q: cs.q, coeffs, inv_margin }
    }

    fn len(&self) -> usize {
        self.inv_margin.len()
    }

    /// Fills `sums[c] = Σ_k d_ck x_k` and `ratios[c]`; returns the minimum.
    fn evaluate(&self, x: &[Complex64], sums: &mut [Complex64], ratios: &mut [f64]) -> f64 {
        let mut min = f64::INFINITY;
        for (c, row) in self.coeffs.chunks_exact(self.q).enumerate() {
            let s: Complex64 = row.iter().zip(x).map(|(&d, &xk)| xk * d).sum();
            let r = s.norm_sqr() * self.inv_margin[c];
            sums[c] = s;
            ratios[c] = r;
            min = min.min(r);
        }
        min
    }

    fn lambda(&self, x: &[Complex64]) -> f64 {
        let mut sums = vec![Complex64::default(); self.len()];
        let mut ratios = vec![0.0; self.len()];
        self.evaluate(x, &mut sums, &mut ratios)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Removes the mean and scales to unit norm. Returns false for a point set
/// that collapses to a single location.
fn centre_and_normalize(x: &mut [Complex64]) -> bool {
    let mean = x.iter().sum::<Complex64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm <= f64::MIN_POSITIVE || !norm.is_finite() {
        return false;
    }
    for v in x.iter_mut() {
        *v /= norm;
    }
    true
}

fn geometric(start: f64, end: f64, frac: f64) -> f64 {
    start * (end / start).powf(frac)
}

struct Run {
    lambda: f64,
    points: Vec<Complex64>,
}

fn random_points(q: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..q)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

fn ascend(problem: &Problem, mut x: Vec<Complex64>, cfg: &SolverConfig, rng: &mut ChaCha8Rng) -> Run {
    let q = problem.q;
    if !centre_and_normalize(&mut x) {
        x = random_points(q, rng);
        centre_and_normalize(&mut x);
    }
    let n = problem.len();
    let mut sums = vec![Complex64::default(); n];
    let mut ratios = vec![0.0; n];
    let mut grad = vec![Complex64::default(); q];
    let mut best = Run { lambda: problem.lambda(&x), points: x.clone() };
    let steps = cfg.iterations.max(1);
    for t in 0..cfg.iterations {
        let frac = if steps > 1 { t as f64 / (steps - 1) as f64 } else { 1.0 };
        let tau = geometric(cfg.temperature_start, cfg.temperature_end, frac);
        let eta = geometric(cfg.step_start, cfg.step_end, frac);
        let lambda = problem.evaluate(&x, &mut sums, &mut ratios);
        if lambda > best.lambda {
            best = Run { lambda, points: x.clone() };
        }
        grad.iter_mut().for_each(|g| *g = Complex64::default());
        if lambda > 0.0 {
            for (c, row) in problem.coeffs.chunks_exact(q).enumerate() {
                let z = (ratios[c] / lambda - 1.0) / tau;
                if z > 60.0 {
                    continue;
                }
                let w = (-z).exp() * 2.0 * problem.inv_margin[c];
                let s = sums[c] * w;
                for (g, &d) in grad.iter_mut().zip(row) {
                    if d != 0.0 {
                        *g += s * d;
                    }
                }
            }
        }
        // tangent to the centred unit sphere
        let mean = grad.iter().sum::<Complex64>() / q as f64;
        let radial: f64 = grad.iter().zip(&x).map(|(g, v)| (g.conj() * v).re).sum();
        for (g, v) in grad.iter_mut().zip(&x) {
            *g -= mean + v * radial;
        }
        let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        if gnorm > 0.0 && gnorm.is_finite() {
            for (v, g) in x.iter_mut().zip(&grad) {
                *v += g * (eta / gnorm);
            }
        } else {
            // stuck on coincident points: nudge randomly
            for v in x.iter_mut() {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *v += Complex64::new(re, im) * eta;
            }
        }
        centre_and_normalize(&mut x);
    }
    let lambda = problem.lambda(&x);
    if lambda > best.lambda {
        best = Run { lambda, points: x };
    }
    best
}

/// Solves the max–min design problem from several starts and keeps the
/// best result (ties go to the earliest start).
pub fn solve_maxmin(cs: &ConstraintSet, q: usize, cfg: &SolverConfig) -> Result<DesignResult> {
    if cs.q != q {
        return argument(format!("constraints are for q = {} but q = {q} was requested", cs.q));
    }
    if q < 2 {
        return argument("need at least two symbols");
    }
    if cs.constraints.iter().any(|c| c.left.len() != q || c.right.len() != q || !(c.margin >= 0.0)) {
        return argument("malformed constraint");
    }
    let live = ConstraintSet {
        q,
        form: cs.form,
        constraints: cs.constraints.iter().filter(|c| c.margin > 0.0).cloned().collect(),
    };
    let problem = Problem::new(&live);
    if problem.len() == 0 {
        return argument("no constraint with a positive margin; λ is undefined");
    }
    for w in &cfg.warm_starts {
        if w.len() != q {
            return argument(format!("warm start has {} points, expected {q}", w.len()));
        }
    }

    let n_warm = cfg.warm_starts.len();
    let total = n_warm + cfg.restarts;
    if total == 0 {
        return argument("need at least one start");
    }
    let runs = map_indexed(total, cfg.workers, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        let start = if r < n_warm {
            cfg.warm_starts[r].clone()
        } else if r == n_warm && cfg.pam_start {
            (0..q).map(|k| Complex64::new(k as f64, 0.0)).collect()
        } else {
            random_points(q, &mut rng)
        };
        ascend(&problem, start, cfg, &mut rng)
    });
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .fold(None::<(usize, Run)>, |acc, (i, run)| match acc {
            Some((j, b)) if b.lambda >= run.lambda => Some((j, b)),
            _ => Some((i, run)),
        })
        .expect("at least one start");

    let constellation = Constellation::new(best.points, PowerConvention::UnitVectorNorm)?;
    let lambda_star = lambda_of(&live, constellation.points());
    let active_pairs = cs
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.margin > 0.0 && c.ratio(constellation.points()) <= lambda_star * (1.0 + 1e-9))
        .map(|(i, _)| i)
        .collect();
    Ok(DesignResult {
        constellation,
        lambda_star,
        active_pairs,
        diagnostics: Diagnostics {
            restarts: total,
            iterations: cfg.iterations,
            final_temperature: cfg.temperature_end,
            best_restart,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_constraints_full, Constraint, ConstraintForm};
    use crate::symfunc::{index_levels, FunctionSpec};
    use crate::Limits;

    fn two_point(margin: f64) -> ConstraintSet {
        ConstraintSet {
            q: 2,
            form: ConstraintForm::Full { p: 1, p_prime: 1 },
            constraints: vec![Constraint { left: vec![1, 0], right: vec![0, 1], margin, scale: 1 }],
        }
    }

    #[test]
    fn two_point_problem_is_antipodal() {
        let r = solve_maxmin(&two_point(9.0), 2, &SolverConfig::default()).unwrap();
        let p = r.constellation.points();
        assert!((p[0] + p[1]).norm() < 1e-12);
        assert!((p[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.lambda_star - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn empty_or_vacuous_constraints_are_rejected() {
        let cs = ConstraintSet { q: 2, form: ConstraintForm::Reduced { p: 1 }, constraints: vec![] };
        assert!(solve_maxmin(&cs, 2, &SolverConfig::default()).is_err());
        assert!(solve_maxmin(&two_point(0.0), 2, &SolverConfig::default()).is_err());
        assert!(solve_maxmin(&two_point(1.0), 3, &SolverConfig::default()).is_err());
    }

    #[test]
    fn random_starts_alone_find_pam_for_sum() {
        let cs =
            build_constraints_full(&FunctionSpec::sum(), 2, 4, 1, None, &index_levels(4), &Limits::default()).unwrap();
        let cfg = SolverConfig { pam_start: false, restarts: 8, ..SolverConfig::default() };
        let r = solve_maxmin(&cs, 4, &cfg).unwrap();
        // equispaced and centred: λ = 12 / (q (q² - 1)) = 0.2
        assert!(r.lambda_star > 0.2 * 0.97, "λ* = {}", r.lambda_star);
        assert!(r.lambda_star <= 0.2 * (1.0 + 1e-9));
    }

    #[test]
    fn deterministic_given_seed_and_independent_of_workers() {
        let cs = build_constraints_full(&FunctionSpec::product(), 2, 4, 1, None, &index_levels(4), &Limits::default())
            .unwrap();
        let base = SolverConfig { restarts: 4, iterations: 300, seed: 7, ..SolverConfig::default() };
        let a = solve_maxmin(&cs, 4, &SolverConfig { workers: Workers::Sequential, ..base.clone() }).unwrap();
        let b = solve_maxmin(&cs, 4, &SolverConfig { workers: Workers::Threads(3), ..base }).unwrap();
        assert_eq!(a.constellation, b.constellation);
        assert_eq!(a.lambda_star.to_bits(), b.lambda_star.to_bits());
    }

    #[test]
    fn parallel_constraints_collapse() {
        let cs = ConstraintSet {
            q: 2,
            form: ConstraintForm::Full { p: 1, p_prime: 1 },
            constraints: vec![
                Constraint { left: vec![1, 0], right: vec![0, 1], margin: 1.0, scale: 1 },
                Constraint { left: vec![0, 2], right: vec![2, 0], margin: 16.0, scale: 1 },
            ],
        };
        let p = Problem::new(&cs);
        assert_eq!(p.len(), 1);
        assert_eq!(p.inv_margin[0], 0.25);
    }
}
