//! Experiment presets for the trade-off curves, quantization study,
//! designed constellations, modulation comparison and designed-versus-
//! majority comparison.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use super::diagonal::DiagonalRange;
use super::mse::{monte_carlo, run_mse, ExperimentConfig, InputModel, MseReport, MseRow, SnrGrid, Transmitter};
use super::output::{Artifact, RunMetadata};
use crate::channel::{quantize_input, trial_rng, uniform_input};
use crate::design::{build_constraints_reduced_sampled, solve_maxmin, DesignResult, SolverConfig};
use crate::error::{argument, Error, Result};
use crate::exec::Workers;
use crate::modulations::ModulationKind;
use crate::sampling::tradeoff_curve;
use crate::symfunc::{midpoint_levels, FunctionSpec};
use crate::Limits;

pub const TRADEOFF_COLUMNS: [&str; 4] = ["q", "p", "epsilon", "delta_norm"];
pub const QUANTIZATION_COLUMNS: [&str; 5] = ["q", "function", "scheme", "mse", "stderr"];
pub const CONSTELLATION_COLUMNS: [&str; 6] = ["function", "p", "index", "re", "im", "lambda"];
pub const MSE_COLUMNS: [&str; 6] = ["scheme", "function", "snr_db", "mse", "stderr", "trials"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Tradeoff,
    Quantization,
    Constellations,
    MseModulations,
    CcVsMajority,
}

impl Preset {
    pub const ALL: [Preset; 5] =
        [Preset::Tradeoff, Preset::Quantization, Preset::Constellations, Preset::MseModulations, Preset::CcVsMajority];

    /// Short name used for output files.
    pub fn file_stem(self) -> &'static str {
        match self {
            Preset::Tradeoff => "fig2",
            Preset::Quantization => "fig3",
            Preset::Constellations => "fig5",
            Preset::MseModulations => "fig7",
            Preset::CcVsMajority => "fig8",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Preset::Tradeoff => "tradeoff",
            Preset::Quantization => "quantization",
            Preset::Constellations => "constellations",
            Preset::MseModulations => "mse_modulations",
            Preset::CcVsMajority => "cc_vs_majority",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_stem())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.file_stem() == s || p.long_name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown preset '{s}'")))
    }
}

/// Knobs shared by all presets. `None` budgets use each preset's default.
#[derive(Debug, Clone)]
pub struct PresetOptions {
    pub seed: u64,
    pub workers: Workers,
    pub trials: Option<usize>,
    pub restarts: Option<usize>,
    pub iterations: Option<usize>,
    /// Standard constellation standing in for the high-resolution scheme
    /// of the designed-versus-majority comparison.
    pub majority_modulation: ModulationKind,
    pub limits: Limits,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            seed: 1,
            workers: Workers::Auto,
            trials: None,
            restarts: None,
            iterations: None,
            majority_modulation: ModulationKind::Pam,
            limits: Limits::default(),
        }
    }
}

impl PresetOptions {
    fn solver(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed,
            workers: self.workers,
            ..d
        }
    }

    fn solver_echo(&self) -> serde_json::Value {
        serde_json::to_value(self.solver()).unwrap_or_default()
    }
}

// ---------------------------------------------------------------------------
// trade-off curves

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub q: usize,
    pub p: u32,
    pub epsilon: f64,
    pub delta_norm: f64,
}

/// Normalized complexity against sampling error with `L = 1`.
pub fn preset_tradeoff(k: u32, qs: &[usize]) -> Result<Vec<TradeoffRow>> {
    let mut rows = Vec::new();
    for &q in qs {
        for pt in tradeoff_curve(k, q, 1.0)? {
            rows.push(TradeoffRow { q, p: pt.p, epsilon: pt.epsilon, delta_norm: pt.delta_norm });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// quantization study

/// Noise-free output schemes compared in the quantization study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuantizationScheme {
    /// `p = 1`, `q` levels: `g` of the quantized inputs.
    #[serde(rename = "p1-q")]
    Full,
    /// `p = K`, `qK` levels: nearest all-equal output.
    #[serde(rename = "pK-qK")]
    ScaledLevels,
    /// `p = K`, `q^K` levels: nearest all-equal output.
    #[serde(rename = "pK-q^K")]
    HighLevels,
}

impl QuantizationScheme {
    pub const ALL: [QuantizationScheme; 3] =
        [QuantizationScheme::Full, QuantizationScheme::ScaledLevels, QuantizationScheme::HighLevels];

    pub fn label(self) -> &'static str {
        match self {
            QuantizationScheme::Full => "p1-q",
            QuantizationScheme::ScaledLevels => "pK-qK",
            QuantizationScheme::HighLevels => "pK-q^K",
        }
    }

    /// Number of quantization levels per node.
    pub fn levels(self, q: usize, k: u32) -> Result<usize> {
        match self {
            QuantizationScheme::Full => Ok(q),
            QuantizationScheme::ScaledLevels => Ok(q * k as usize),
            QuantizationScheme::HighLevels => (q as u64)
                .checked_pow(k)
                .and_then(|v| usize::try_from(v).ok())
                .ok_or_else(|| Error::Argument(format!("{q}^{k} levels overflow"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizationRow {
    pub q: usize,
    pub function: String,
    pub scheme: QuantizationScheme,
    pub mse: f64,
    pub stderr: f64,
}

struct QuantizationCell {
    q: usize,
    f: FunctionSpec,
    scheme: QuantizationScheme,
    levels: usize,
    diagonal: Option<DiagonalRange>,
}

/// Noise-free MSE of the three output schemes for independent inputs on
/// `(0, 1]^K`. All-equal output sets with more than `level_cap` levels are
/// searched by inverting the diagonal instead of through a table; the
/// returned notes say which.
pub fn preset_quantization(
    k: u32,
    qs: &[usize],
    functions: &[FunctionSpec],
    trials: usize,
    seed: u64,
    workers: Workers,
    level_cap: u64,
) -> Result<(Vec<QuantizationRow>, Vec<String>)> {
    if trials == 0 {
        return argument("need at least one trial");
    }
    let mut cells = Vec::new();
    let mut notes = Vec::new();
    for f in functions {
        for &q in qs {
            for scheme in QuantizationScheme::ALL {
                let levels = scheme.levels(q, k)?;
                let diagonal = match scheme {
                    QuantizationScheme::Full => None,
                    _ => {
                        let d = DiagonalRange::new(f, k, levels, level_cap)?;
                        if !d.is_tabulated() {
                            notes.push(format!(
                                "{} q={q} {}: {levels} levels above cap {level_cap}, nearest all-equal output found analytically",
                                f.name(),
                                scheme.label()
                            ));
                        }
                        Some(d)
                    }
                };
                cells.push(QuantizationCell { q, f: f.clone(), scheme, levels, diagonal });
            }
        }
    }
    let moments = monte_carlo(trials, cells.len(), workers, |t, out| {
        let mut rng = trial_rng(seed, t);
        let s: Vec<f64> = (0..k).map(|_| uniform_input(&mut rng)).collect();
        let mut quantized = vec![0.0; s.len()];
        for (e, cell) in out.iter_mut().zip(&cells) {
            let truth = cell.f.eval_on_values(&s)?;
            for (m, &v) in quantized.iter_mut().zip(&s) {
                *m = (quantize_input(v, cell.levels)? as f64 + 0.5) / cell.levels as f64;
            }
            let tabular = cell.f.eval_on_values(&quantized)?;
            let est = match &cell.diagonal {
                None => tabular,
                Some(d) => d.value(d.nearest(tabular)),
            };
            *e = (truth - est) * (truth - est);
        }
        Ok(())
    })?;
    let rows = cells
        .iter()
        .zip(&moments)
        .map(|(c, m)| QuantizationRow {
            q: c.q,
            function: c.f.name().to_string(),
            scheme: c.scheme,
            mse: m.mean(),
            stderr: m.stderr(),
        })
        .collect();
    Ok((rows, notes))
}

// ---------------------------------------------------------------------------
// designed constellations

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstellationRow {
    pub function: String,
    pub p: u32,
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct ConstellationCell {
    pub function: String,
    pub p: u32,
    pub constraints: usize,
    pub result: std::result::Result<DesignResult, String>,
}

impl ConstellationCell {
    /// Point pairs closer than `tol`.
    pub fn coincident_pairs(&self, tol: f64) -> Vec<(usize, usize)> {
        let Ok(r) = &self.result else { return Vec::new() };
        let pts = r.constellation.points();
        let mut out = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if (pts[i] - pts[j]).norm() < tol {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Designs from the reduced constraints restricted to transitions inside
/// Ω_p, on midpoint levels. A failing cell is reported and the rest still
/// run.
pub fn preset_constellations(
    functions: &[FunctionSpec],
    k: u32,
    q: usize,
    orders: &[u32],
    opts: &PresetOptions,
) -> Result<Vec<ConstellationCell>> {
    let levels = midpoint_levels(q)?;
    let solver = opts.solver();
    let mut cells = Vec::new();
    for f in functions {
        for &p in orders {
            let built = build_constraints_reduced_sampled(f, k, q, p, &levels, &opts.limits);
            let (constraints, result) = match built {
                Ok(cs) => (cs.len(), solve_maxmin(&cs, q, &solver).map_err(|e| e.to_string())),
                Err(e) => (0, Err(e.to_string())),
            };
            if let Err(e) = &result {
                log::warn!("design {} p={p} failed: {e}", f.name());
            }
            cells.push(ConstellationCell { function: f.name().to_string(), p, constraints, result });
        }
    }
    Ok(cells)
}

// ---------------------------------------------------------------------------
// MSE against SNR

fn snr_sweep() -> SnrGrid {
    SnrGrid { start: 0.0, stop: 20.0, step: 2.0 }
}

/// Majority decoding with standard modulations and a shared input.
pub fn preset_mse_modulations(
    k: u32,
    qs: &[usize],
    kinds: &[ModulationKind],
    functions: &[&str],
    snr: SnrGrid,
    trials: usize,
    seed: u64,
    workers: Workers,
    limits: &Limits,
) -> Result<Vec<MseReport>> {
    let mut out = Vec::new();
    for &function in functions {
        for &q in qs {
            for &kind in kinds {
                let cfg = ExperimentConfig {
                    scheme: format!("{kind}{q}"),
                    function: function.to_string(),
                    k,
                    q,
                    p: k,
                    transmitter: Transmitter::Majority { modulation: kind },
                    inputs: InputModel::Shared,
                    snr,
                    trials,
                    seed,
                };
                out.push(run_mse(&cfg, workers, limits)?);
            }
        }
    }
    Ok(out)
}

/// Output of the designed-versus-majority comparison.
#[derive(Debug, Clone)]
pub struct CcVsMajority {
    pub designs: Vec<(String, DesignResult)>,
    pub reports: Vec<MseReport>,
}

/// Low-resolution designed constellations (`q_low` levels, reduced
/// constraints, tabular decoding over Ω_1) against a high-resolution
/// standard constellation under majority sampling, both with independent
/// inputs at `K` nodes.
pub fn preset_cc_vs_majority(
    k: u32,
    q_low: usize,
    q_high: usize,
    functions: &[&str],
    snr: SnrGrid,
    trials: usize,
    opts: &PresetOptions,
) -> Result<CcVsMajority> {
    let levels = midpoint_levels(q_low)?;
    let solver = opts.solver();
    let mut designs = Vec::new();
    let mut reports = Vec::new();
    for &function in functions {
        let f = FunctionSpec::from_name(function)?;
        let cs = build_constraints_reduced_sampled(&f, k, q_low, 1, &levels, &opts.limits)?;
        let design = solve_maxmin(&cs, q_low, &solver)?;
        let low = ExperimentConfig {
            scheme: format!("designed-q{q_low}"),
            function: function.to_string(),
            k,
            q: q_low,
            p: 1,
            transmitter: Transmitter::Design {
                points: design.constellation.points().iter().map(|&z| z.into()).collect(),
            },
            inputs: InputModel::Independent,
            snr,
            trials,
            seed: opts.seed,
        };
        let high = ExperimentConfig {
            scheme: format!("majority-{}{q_high}", opts.majority_modulation),
            function: function.to_string(),
            k,
            q: q_high,
            p: k,
            transmitter: Transmitter::Majority { modulation: opts.majority_modulation },
            inputs: InputModel::Independent,
            snr,
            trials,
            seed: opts.seed,
        };
        reports.push(run_mse(&low, opts.workers, &opts.limits)?);
        reports.push(run_mse(&high, opts.workers, &opts.limits)?);
        designs.push((function.to_string(), design));
    }
    Ok(CcVsMajority { designs, reports })
}

// ---------------------------------------------------------------------------
// preset runner

fn mse_rows(reports: &[MseReport]) -> Vec<MseRow> {
    reports.iter().flat_map(|r| r.rows.iter().cloned()).collect()
}

/// Runs a preset with its default parameters and returns its tables.
pub fn run_preset(preset: Preset, opts: &PresetOptions) -> Result<Vec<Artifact>> {
    let stem = preset.file_stem();
    match preset {
        Preset::Tradeoff => {
            let (k, qs) = (100, [4, 32, 64, 128]);
            let rows = preset_tradeoff(k, &qs)?;
            let mut meta = RunMetadata::new(stem, opts.seed, &TRADEOFF_COLUMNS, json!({ "K": k, "q": qs, "L": 1.0 }));
            meta.notes.push("complexity uses the generic bound ln|Ω_p| for every p".into());
            Ok(vec![Artifact::new(stem, &TRADEOFF_COLUMNS, &rows, &meta)?])
        }
        Preset::Quantization => {
            let k = 5;
            let qs: Vec<usize> = (2..=32).step_by(2).collect();
            let trials = opts.trials.unwrap_or(2000);
            let level_cap = 1 << 20;
            let functions = [FunctionSpec::sum(), FunctionSpec::product()];
            let (rows, notes) = preset_quantization(k, &qs, &functions, trials, opts.seed, opts.workers, level_cap)?;
            let mut meta = RunMetadata::new(
                stem,
                opts.seed,
                &QUANTIZATION_COLUMNS,
                json!({ "K": k, "q": qs, "functions": ["sum", "product"], "trials": trials,
                        "inputs": "independent", "channel": "noise-free", "level_cap": level_cap }),
            );
            meta.notes = notes;
            Ok(vec![Artifact::new(stem, &QUANTIZATION_COLUMNS, &rows, &meta)?])
        }
        Preset::Constellations => {
            let (k, q, orders) = (16, 8, [1u32, 2, 4, 8]);
            let functions = [FunctionSpec::sum(), FunctionSpec::product()];
            let cells = preset_constellations(&functions, k, q, &orders, opts)?;
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for cell in &cells {
                match &cell.result {
                    Ok(r) => {
                        for (index, z) in r.constellation.points().iter().enumerate() {
                            rows.push(ConstellationRow {
                                function: cell.function.clone(),
                                p: cell.p,
                                index,
                                re: z.re,
                                im: z.im,
                                lambda: r.lambda_star,
                            });
                        }
                        summary.push(json!({
                            "function": cell.function, "p": cell.p, "constraints": cell.constraints,
                            "lambda_star": r.lambda_star, "active_pairs": r.active_pairs,
                            "coincident_pairs_1e-3": cell.coincident_pairs(1e-3),
                            "best_restart": r.diagnostics.best_restart,
                        }));
                    }
                    Err(e) => summary.push(json!({ "function": cell.function, "p": cell.p, "error": e })),
                }
            }
            let mut meta = RunMetadata::new(
                stem,
                opts.seed,
                &CONSTELLATION_COLUMNS,
                json!({ "K": k, "q": q, "p": orders, "functions": ["sum", "product"], "levels": "midpoint",
                        "constraints": "reduced, transitions within Ω_p", "power_convention": "unit-vector-norm",
                        "solver": opts.solver_echo(), "cells": summary }),
            );
            meta.notes.push("full pairwise constraints over Ω_1 are out of reach at K=16, q=8".into());
            Ok(vec![Artifact::new(stem, &CONSTELLATION_COLUMNS, &rows, &meta)?])
        }
        Preset::MseModulations => {
            let (k, qs) = (50, [16, 32, 64]);
            let kinds = [ModulationKind::Qam, ModulationKind::Pam, ModulationKind::Hex];
            let functions = ["geomean", "max"];
            let trials = opts.trials.unwrap_or(100_000);
            let snr = snr_sweep();
            let reports =
                preset_mse_modulations(k, &qs, &kinds, &functions, snr, trials, opts.seed, opts.workers, &opts.limits)?;
            let meta = RunMetadata::new(
                stem,
                opts.seed,
                &MSE_COLUMNS,
                json!({ "K": k, "q": qs, "modulations": ["qam", "pam", "hex"], "functions": functions,
                        "inputs": "shared", "snr": snr, "trials": trials, "decoder": "nearest scaled point" }),
            );
            Ok(vec![Artifact::new(stem, &MSE_COLUMNS, &mse_rows(&reports), &meta)?])
        }
        Preset::CcVsMajority => {
            let (k, q_low, q_high) = (10, 4, 1024);
            let functions = ["sum", "product", "max"];
            let trials = opts.trials.unwrap_or(10_000);
            let snr = snr_sweep();
            let out = preset_cc_vs_majority(k, q_low, q_high, &functions, snr, trials, opts)?;
            let designs: Vec<_> = out
                .designs
                .iter()
                .zip(out.reports.chunks(2))
                .map(|((f, d), reps)| {
                    json!({ "function": f, "lambda_star": d.lambda_star,
                            "points": d.constellation.points().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                            "power_scale": reps[0].power_scale, "decoder_collisions": reps[0].decoder_collisions })
                })
                .collect();
            let mut meta = RunMetadata::new(
                stem,
                opts.seed,
                &MSE_COLUMNS,
                json!({ "K": k, "q_low": q_low, "q_high": q_high, "functions": functions, "inputs": "independent",
                        "snr": snr, "trials": trials, "low_constraints": "reduced, p=1",
                        "majority_modulation": opts.majority_modulation.to_string(),
                        "solver": opts.solver_echo(), "designs": designs }),
            );
            meta.notes.push(format!(
                "the high-resolution scheme is a standard {}{q_high} constellation under majority sampling, substituted for a designed one",
                opts.majority_modulation
            ));
            meta.notes.push("designed points are rescaled to unit average power before transmission".into());
            Ok(vec![Artifact::new(stem, &MSE_COLUMNS, &mse_rows(&out.reports), &meta)?])
        }
    }
}
