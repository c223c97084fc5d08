//! One round of digital over-the-air computation under ideal channel
//! inversion: quantize, map to symbols, superimpose, add complex AWGN,
//! decode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::design::Constraint;
use crate::error::{argument, Result};
use crate::sampling::SamplingSet;
use crate::symfunc::{FunctionSpec, Histogram};
use crate::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    #[serde(rename = "K")]
    pub k: u32,
    /// Per-node SNR in dB.
    pub snr_db: f64,
    pub seed: u64,
}

impl ChannelConfig {
    /// Total complex noise variance for unit average symbol power.
    pub fn noise_variance(&self) -> f64 {
        noise_variance(self.snr_db)
    }
}

/// `σ² = 10^(-snr/10)`, split equally between I and Q.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// RNG stream for one Monte Carlo trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A draw from `𝒰(0, 1]`.
pub fn uniform_input<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Circularly symmetric complex Gaussian with total variance `sigma2`.
pub fn complex_noise<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> Complex64 {
    if sigma2 <= 0.0 {
        return Complex64::default();
    }
    let n = Normal::new(0.0, (sigma2 / 2.0).sqrt()).expect("finite positive deviation");
    Complex64::new(n.sample(rng), n.sample(rng))
}

/// Bin index of `s` under the right-closed uniform quantizer on `(0, 1]`:
/// `s ∈ (i/q, (i+1)/q]`.
pub fn quantize_input(s: f64, q: usize) -> Result<usize> {
    if !(s > 0.0 && s <= 1.0) {
        return argument(format!("input {s} is outside (0, 1]"));
    }
    if q == 0 {
        return argument("need at least one quantization level");
    }
    let i = (s * q as f64).ceil() as usize;
    Ok(i.clamp(1, q) - 1)
}

/// `r = Σ_k x[level_k] + z` with `z` drawn once from the given variance.
pub fn transmit<R: Rng + ?Sized>(
    levels_chosen: &[usize],
    c: &Constellation,
    sigma2: f64,
    rng: &mut R,
) -> Result<Complex64> {
    let points = c.points();
    let mut r = Complex64::default();
    for &i in levels_chosen {
        match points.get(i) {
            Some(x) => r += x,
            None => return argument(format!("level {i} is outside a constellation of {}", points.len())),
        }
    }
    Ok(r + complex_noise(sigma2, rng))
}

/// `argmin_i |r - K·x_i|`, ties to the smallest index.
pub fn decode_majority(r: Complex64, c: &Constellation, k: u32) -> usize {
    let kf = k as f64;
    let mut best = (0, f64::INFINITY);
    for (i, x) in c.points().iter().enumerate() {
        let d = (r - x * kf).norm_sqr();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodedOutcome {
    /// Function value attached to the decision.
    pub estimate: f64,
    /// The decoded histogram (`K·e_i` for majority decoding).
    pub decision: Histogram,
    pub received: Complex64,
}

/// Nearest-superposition decoder over Ω_p with its lookup table built once.
#[derive(Debug, Clone)]
pub struct TabularDecoder {
    sums: Vec<Complex64>,
    histograms: Vec<Histogram>,
    values: Vec<f64>,
    collisions: usize,
}

/// Superpositions closer than this (relative to the largest one) are
/// treated as one point.
const COINCIDENT: f64 = 1e-12;

impl TabularDecoder {
    pub fn new(c: &Constellation, f: &FunctionSpec, k: u32, p: u32, levels: &[f64], limits: &Limits) -> Result<Self> {
        let set = SamplingSet::enumerate(k, c.len(), p, limits)?;
        if set.is_empty() {
            return argument(format!("Ω_{p} is empty for K = {k}"));
        }
        let scale = c.points().iter().map(|x| x.norm()).fold(0.0, f64::max) * k as f64;
        let tol = COINCIDENT * scale.max(f64::MIN_POSITIVE);
        let mut sums: Vec<Complex64> = Vec::with_capacity(set.len());
        let mut histograms = Vec::with_capacity(set.len());
        let mut values = Vec::with_capacity(set.len());
        // histograms arrive in lexicographic order, so the first of any
        // coincident group is kept
        let mut order: Vec<(Complex64, &Histogram)> =
            set.histograms().iter().map(|h| (Constraint::superposition(h.counts(), c.points()), h)).collect();
        let mut seen: Vec<usize> = (0..order.len()).collect();
        seen.sort_by(|&a, &b| order[a].0.re.total_cmp(&order[b].0.re).then(a.cmp(&b)));
        let mut dropped = vec![false; order.len()];
        for (pos, &a) in seen.iter().enumerate() {
            for &b in &seen[pos + 1..] {
                if order[b].0.re - order[a].0.re > tol {
                    break;
                }
                if (order[a].0 - order[b].0).norm() <= tol {
                    dropped[a.max(b)] = true;
                }
            }
        }
        let collisions = dropped.iter().filter(|&&d| d).count();
        for (idx, (sum, h)) in order.drain(..).enumerate() {
            if dropped[idx] {
                continue;
            }
            values.push(f.eval_on_histogram(h, levels)?);
            sums.push(sum);
            histograms.push(h.clone());
        }
        Ok(TabularDecoder { sums, histograms, values, collisions })
    }

    /// Number of histograms whose superposition duplicated an earlier one.
    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn decode(&self, r: Complex64) -> DecodedOutcome {
        let mut best = (0, f64::INFINITY);
        for (i, s) in self.sums.iter().enumerate() {
            let d = (r - s).norm_sqr();
            if d < best.1 {
                best = (i, d);
            }
        }
        DecodedOutcome { estimate: self.values[best.0], decision: self.histograms[best.0].clone(), received: r }
    }
}

/// One-shot tabular decoding; prefer [`TabularDecoder`] for repeated use.
pub fn decode_tabular(
    r: Complex64,
    c: &Constellation,
    f: &FunctionSpec,
    k: u32,
    p: u32,
    levels: &[f64],
    limits: &Limits,
) -> Result<DecodedOutcome> {
    Ok(TabularDecoder::new(c, f, k, p, levels, limits)?.decode(r))
}

/// Majority decision followed by the all-equal evaluation `g(K·e_i)`.
pub fn decode_majority_outcome(
    r: Complex64,
    c: &Constellation,
    f: &FunctionSpec,
    k: u32,
    levels: &[f64],
) -> Result<DecodedOutcome> {
    let i = decode_majority(r, c, k);
    Ok(DecodedOutcome {
        estimate: f.eval_unanimous(i, k, levels)?,
        decision: Histogram::unanimous(k, c.len(), i),
        received: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulations::{generate, ModulationKind, ModulationSpec};
    use crate::symfunc::{index_levels, midpoint_levels};

    #[test]
    fn quantizer_bins() {
        assert_eq!(quantize_input(1.0, 7).unwrap(), 6);
        assert_eq!(quantize_input(0.5, 16).unwrap(), 7);
        assert_eq!(midpoint_levels(16).unwrap()[7], 0.46875);
        assert_eq!(quantize_input(1e-300, 4).unwrap(), 0);
        assert!(quantize_input(0.0, 4).is_err());
        assert!(quantize_input(1.0 + 1e-15, 4).is_err());
        assert!(quantize_input(f64::NAN, 4).is_err());
        for q in 2..=64 {
            for (i, m) in midpoint_levels(q).unwrap().into_iter().enumerate() {
                assert_eq!(quantize_input(m, q).unwrap(), i);
            }
        }
    }

    #[test]
    fn noiseless_superposition() {
        let c = generate(ModulationSpec::new(ModulationKind::Qam, 16)).unwrap();
        let mut rng = trial_rng(1, 0);
        let r = transmit(&[3, 3, 3], &c, 0.0, &mut rng).unwrap();
        assert_eq!(r, c.points()[3] * 3.0);
        let r = transmit(&[0, 1], &c, 0.0, &mut rng).unwrap();
        assert_eq!(r, c.points()[0] + c.points()[1]);
        assert!(transmit(&[16], &c, 0.0, &mut rng).is_err());
    }

    #[test]
    fn majority_ties_go_low() {
        let c = generate(ModulationSpec::new(ModulationKind::Psk, 4)).unwrap();
        assert_eq!(decode_majority(Complex64::new(1.0, 1.0), &c, 4), 0);
        assert_eq!(decode_majority(Complex64::default(), &c, 4), 0);
        assert_eq!(decode_majority(c.points()[2] * 4.0, &c, 4), 2);
    }

    #[test]
    fn tabular_matches_majority_at_p_equal_k() {
        let c = generate(ModulationSpec::new(ModulationKind::Psk, 5)).unwrap();
        let levels = index_levels(5);
        let f = FunctionSpec::product();
        let dec = TabularDecoder::new(&c, &f, 3, 3, &levels, &Limits::default()).unwrap();
        let mut rng = trial_rng(9, 0);
        for _ in 0..500 {
            let r = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let a = dec.decode(r);
            let b = decode_majority_outcome(r, &c, &f, 3, &levels).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn coincident_sums_keep_lexicographically_smallest() {
        // PAM on 3 levels: (1,0,1) and (0,2,0) superimpose to 0
        let c = generate(ModulationSpec::new(ModulationKind::Pam, 3)).unwrap();
        let dec = TabularDecoder::new(&c, &FunctionSpec::max(), 2, 1, &index_levels(3), &Limits::default()).unwrap();
        assert_eq!(dec.collisions(), 1);
        let out = dec.decode(Complex64::default());
        assert_eq!(out.decision, Histogram::new(vec![0, 2, 0]).unwrap());
        assert_eq!(out.estimate, 1.0);
    }

    #[test]
    fn same_seed_same_noise() {
        let a = complex_noise(0.3, &mut trial_rng(5, 17));
        let b = complex_noise(0.3, &mut trial_rng(5, 17));
        assert_eq!(a, b);
        assert_ne!(a, complex_noise(0.3, &mut trial_rng(5, 18)));
    }
}
