//! Monte Carlo estimation of the end-to-end mean-squared error.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::diagonal::DiagonalRange;
use crate::channel::{decode_majority, noise_variance, quantize_input, trial_rng, uniform_input, TabularDecoder};
use crate::constellation::{Constellation, PowerConvention};
use crate::design::{DesignDocument, PointRecord};
use crate::error::{argument, Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::modulations::{generate, ModulationKind, ModulationSpec};
use crate::symfunc::{midpoint_levels, FunctionSpec, Histogram};
use crate::Limits;

/// Trials per work unit. Fixed so the reduction order never depends on
/// the number of workers.
pub const CHUNK: usize = 1024;

/// How node inputs are drawn in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputModel {
    /// One `s ~ 𝒰(0,1]` held by every node.
    Shared,
    /// Independent draws per node.
    Independent,
}

/// What the nodes transmit and how the receiver decodes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transmitter {
    /// Standard constellation; nodes agree on the level whose all-equal
    /// output is nearest to `g` of their quantized inputs, every node sends
    /// that symbol and the receiver picks the nearest scaled point.
    Majority { modulation: ModulationKind },
    /// Designed constellation read from a JSON document, decoded by the
    /// nearest superposition over Ω_p.
    DesignFile { path: PathBuf },
    /// Designed constellation given inline.
    Design { points: Vec<PointRecord> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn single(snr_db: f64) -> Self {
        SnrGrid { start: snr_db, stop: snr_db, step: 1.0 }
    }

    /// `start, start + step, …` up to `stop` inclusive (with a small
    /// allowance for rounding).
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite()) || !(self.step > 0.0) || self.stop < self.start {
            return argument(format!("invalid SNR grid {}:{}:{}", self.start, self.step, self.stop));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Label written to the `scheme` column.
    pub scheme: String,
    pub function: String,
    #[serde(rename = "K")]
    pub k: u32,
    pub q: usize,
    /// Sampling order for tabular decoding; ignored by majority schemes.
    pub p: u32,
    pub transmitter: Transmitter,
    pub inputs: InputModel,
    pub snr: SnrGrid,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub scheme: String,
    pub function: String,
    pub snr_db: f64,
    pub mse: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseReport {
    pub config: ExperimentConfig,
    /// Factor applied to the transmitted points to reach unit average
    /// power (1 for standard modulations).
    pub power_scale: f64,
    /// Decoder entries merged because their superpositions coincide.
    pub decoder_collisions: usize,
    pub rows: Vec<MseRow>,
}

/// Running sums of squared errors, reduced in chunk order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, e: f64) {
        self.n += 1;
        self.sum += e;
        self.sum_sq += e * e;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Runs `trial(t, &mut out)` for `t in 0..trials`, where `out` holds one
/// squared error per column, and reduces deterministically.
pub fn monte_carlo<F>(trials: usize, columns: usize, workers: Workers, trial: F) -> Result<Vec<Moments>>
where
    F: Fn(u64, &mut [f64]) -> Result<()> + Sync + Send,
{
    let chunks = trials.div_ceil(CHUNK);
    let partial = map_indexed(chunks, workers, |c| -> Result<Vec<Moments>> {
        let mut acc = vec![Moments::default(); columns];
        let mut buf = vec![0.0; columns];
        for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
            trial(t as u64, &mut buf)?;
            for (m, &e) in acc.iter_mut().zip(&buf) {
                m.push(e);
            }
        }
        Ok(acc)
    });
    let mut total = vec![Moments::default(); columns];
    for part in partial {
        for (t, m) in total.iter_mut().zip(&part?) {
            t.merge(m);
        }
    }
    Ok(total)
}

enum Receiver {
    Majority { diagonal: DiagonalRange },
    Tabular { decoder: TabularDecoder },
}

fn draw_inputs<R: Rng + ?Sized>(inputs: InputModel, k: u32, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    match inputs {
        InputModel::Shared => {
            let s = uniform_input(rng);
            out.resize(k as usize, s);
        }
        InputModel::Independent => out.extend((0..k).map(|_| uniform_input(rng))),
    }
}

fn unit_noise<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    // unit total variance, split between I and Q
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn designed(points: Vec<Complex64>) -> Result<(Constellation, f64)> {
    let c = Constellation::new(points, PowerConvention::UnitVectorNorm)
        .map_err(|_| Error::Argument("designed points exceed unit norm".into()))?;
    c.to_unit_average_power()
}

/// Estimates `MSE = (1/N_s) Σ |f(s_j) - f̂_j|²` at every SNR of the grid.
///
/// Each trial owns the RNG stream `(seed, trial)`: inputs are drawn first,
/// then one unit-variance noise sample scaled for every SNR point, so all
/// SNR points and all schemes run with the same seed see common random
/// numbers.
pub fn run_mse(cfg: &ExperimentConfig, workers: Workers, limits: &Limits) -> Result<MseReport> {
    if cfg.trials == 0 {
        return argument("need at least one trial");
    }
    if cfg.k == 0 {
        return argument("need at least one node");
    }
    let f = FunctionSpec::from_name(&cfg.function)?;
    let snrs = cfg.snr.points()?;
    let levels = midpoint_levels(cfg.q)?;
    let (constellation, power_scale, receiver) = match &cfg.transmitter {
        Transmitter::Majority { modulation } => {
            let c = generate(ModulationSpec::new(*modulation, cfg.q))?;
            let diagonal = DiagonalRange::new(&f, cfg.k, cfg.q, limits.enumeration_cap)?;
            (c, 1.0, Receiver::Majority { diagonal })
        }
        Transmitter::DesignFile { path } => {
            let doc = DesignDocument::load(path)?;
            if doc.q != cfg.q {
                return argument(format!("design has q = {} but the experiment uses q = {}", doc.q, cfg.q));
            }
            let (c, s) = designed(doc.points.iter().map(|&p| p.into()).collect())?;
            let decoder = TabularDecoder::new(&c, &f, cfg.k, cfg.p, &levels, limits)?;
            (c, s, Receiver::Tabular { decoder })
        }
        Transmitter::Design { points } => {
            if points.len() != cfg.q {
                return argument(format!("design has {} points but q = {}", points.len(), cfg.q));
            }
            let (c, s) = designed(points.iter().map(|&p| p.into()).collect())?;
            let decoder = TabularDecoder::new(&c, &f, cfg.k, cfg.p, &levels, limits)?;
            (c, s, Receiver::Tabular { decoder })
        }
    };
    let sigmas: Vec<f64> = snrs.iter().map(|&s| noise_variance(s).sqrt()).collect();
    let points = constellation.points();
    let kf = cfg.k as f64;

    let moments = monte_carlo(cfg.trials, snrs.len(), workers, |t, out| {
        let mut rng = trial_rng(cfg.seed, t);
        let mut s = Vec::with_capacity(cfg.k as usize);
        draw_inputs(cfg.inputs, cfg.k, &mut rng, &mut s);
        let truth = f.eval_on_values(&s)?;
        let idx = s.iter().map(|&v| quantize_input(v, cfg.q)).collect::<Result<Vec<_>>>()?;
        let w = unit_noise(&mut rng);
        match &receiver {
            Receiver::Majority { diagonal } => {
                let h = Histogram::from_indices(&idx, cfg.q)?;
                let consensus = diagonal.nearest(f.eval_on_histogram(&h, &levels)?);
                let signal = points[consensus] * kf;
                for (e, &sigma) in out.iter_mut().zip(&sigmas) {
                    let decided = decode_majority(signal + w * sigma, &constellation, cfg.k);
                    let est = diagonal.value(decided);
                    *e = (truth - est) * (truth - est);
                }
            }
            Receiver::Tabular { decoder } => {
                let signal: Complex64 = idx.iter().map(|&i| points[i]).sum();
                for (e, &sigma) in out.iter_mut().zip(&sigmas) {
                    let est = decoder.decode(signal + w * sigma).estimate;
                    *e = (truth - est) * (truth - est);
                }
            }
        }
        Ok(())
    })?;

    let rows = snrs
        .iter()
        .zip(&moments)
        .map(|(&snr_db, m)| MseRow {
            scheme: cfg.scheme.clone(),
            function: cfg.function.clone(),
            snr_db,
            mse: m.mean(),
            stderr: m.stderr(),
            trials: m.n,
        })
        .collect();
    let decoder_collisions = match &receiver {
        Receiver::Tabular { decoder } => decoder.collisions(),
        Receiver::Majority { .. } => 0,
    };
    Ok(MseReport { config: cfg.clone(), power_scale, decoder_collisions, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn majority_cfg(snr: f64, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            scheme: "qam16".into(),
            function: "max".into(),
            k: 5,
            q: 16,
            p: 5,
            transmitter: Transmitter::Majority { modulation: ModulationKind::Qam },
            inputs: InputModel::Shared,
            snr: SnrGrid::single(snr),
            trials,
            seed: 11,
        }
    }

    #[test]
    fn snr_grid_is_inclusive() {
        let g = SnrGrid { start: 0.0, stop: 20.0, step: 2.0 };
        assert_eq!(g.points().unwrap().len(), 11);
        assert_eq!(SnrGrid::single(3.0).points().unwrap(), vec![3.0]);
        assert!(SnrGrid { start: 0.0, stop: 1.0, step: 0.0 }.points().is_err());
    }

    #[test]
    fn noiseless_majority_hits_quantizer_floor() {
        let r = run_mse(&majority_cfg(200.0, 20_000), Workers::Auto, &Limits::default()).unwrap();
        let floor = 1.0 / (12.0 * 256.0);
        assert!((r.rows[0].mse / floor - 1.0).abs() < 0.05, "{}", r.rows[0].mse);
    }

    #[test]
    fn workers_do_not_change_bits() {
        let cfg = majority_cfg(3.0, 3000);
        let a = run_mse(&cfg, Workers::Sequential, &Limits::default()).unwrap();
        let b = run_mse(&cfg, Workers::Threads(4), &Limits::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_mse(&majority_cfg(0.0, 0), Workers::Auto, &Limits::default()).is_err());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        let mut m = Moments::default();
        for _ in 0..10 {
            m.push(0.5);
        }
        assert_eq!(m.mean(), 0.5);
        assert!(m.stderr() < 1e-12);
    }
}
