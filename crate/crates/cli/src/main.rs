//! `oac`: command-line front end for pyramid sampling, constellation
//! design and over-the-air computation experiments.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pyramid_oac::design::{
    build_constraints_full, build_constraints_reduced_sampled, solve_maxmin, verify_no_overlap, DesignDocument,
    SolverConfig,
};
use pyramid_oac::harness::{
    csv_string, run_mse, run_preset, Artifact, ExperimentConfig, InputModel, Preset, PresetOptions, RunMetadata,
    SnrGrid, Transmitter,
};
use pyramid_oac::modulations::{generate, ModulationKind, ModulationSpec};
use pyramid_oac::sampling::{
    enumerate_transition_set, omega_cardinality, omega_cardinality_bound, transition_cardinality, SamplingSet,
};
use pyramid_oac::symfunc::{index_levels, midpoint_levels, FunctionSpec};
use pyramid_oac::{Limits, Workers};

#[derive(Parser)]
#[command(name = "oac", version, about = "Digital over-the-air computation toolkit")]
struct Cli {
    /// Worker threads for parallel loops (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Largest histogram set that may be enumerated.
    #[arg(long, global = true, default_value_t = Limits::default().enumeration_cap)]
    enumeration_cap: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the histograms of Ω_p as CSV.
    Enumerate(EnumerateArgs),
    /// Solve the max–min design problem and write the result as JSON.
    Design(DesignArgs),
    /// Check a design document for overlapping superpositions.
    Verify(VerifyArgs),
    /// Print a standard constellation as CSV.
    Modulation(ModulationArgs),
    /// Monte Carlo MSE against SNR for one scheme.
    Simulate(SimulateArgs),
    /// Normalized complexity against sampling error.
    Tradeoff(TradeoffArgs),
    /// Regenerate the tables behind one of the reference figures.
    Figures(FiguresArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(short = 'K', long = "nodes")]
    k: u32,
    #[arg(short, long)]
    q: usize,
    #[arg(short, long, default_value_t = 1)]
    p: u32,
    /// Instead list per-level transition counts from level I to level J.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    transitions: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelKind {
    /// Level j has value j.
    Index,
    /// Level j has value (j + 0.5) / q.
    Midpoint,
}

impl LevelKind {
    fn values(self, q: usize) -> Result<Vec<f64>> {
        Ok(match self {
            LevelKind::Index => index_levels(q),
            LevelKind::Midpoint => midpoint_levels(q)?,
        })
    }
}

#[derive(Args)]
struct DesignArgs {
    #[arg(short, long)]
    function: String,
    #[arg(short = 'K', long = "nodes")]
    k: u32,
    #[arg(short, long)]
    q: usize,
    #[arg(short, long, default_value_t = 1)]
    p: u32,
    /// Constrain every pair of Ω_{p'} instead of Ω_p (full form only).
    #[arg(long)]
    p_prime: Option<u32>,
    /// One constraint per symbol pair from transitions inside Ω_p.
    #[arg(long)]
    reduced: bool,
    #[arg(long, value_enum, default_value_t = LevelKind::Midpoint)]
    levels: LevelKind,
    #[arg(long, default_value_t = SolverConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = SolverConfig::default().iterations)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Design document written by `oac design`.
    design: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Sampling order to check; defaults to the design's own.
    #[arg(short, long)]
    p: Option<u32>,
}

#[derive(Args)]
struct ModulationArgs {
    #[arg(long)]
    kind: ModulationKind,
    #[arg(short, long)]
    q: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(short, long)]
    function: String,
    #[arg(short = 'K', long = "nodes")]
    k: u32,
    #[arg(short, long)]
    q: usize,
    /// Sampling order for tabular decoding of designed constellations.
    #[arg(short, long, default_value_t = 1)]
    p: u32,
    /// Standard constellation under majority sampling.
    #[arg(long, conflicts_with = "design", required_unless_present = "design")]
    modulation: Option<ModulationKind>,
    /// Designed constellation decoded over Ω_p.
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Inputs::Independent)]
    inputs: Inputs,
    #[arg(long, default_value_t = 0.0)]
    snr_start: f64,
    #[arg(long, default_value_t = 20.0)]
    snr_stop: f64,
    #[arg(long, default_value_t = 2.0)]
    snr_step: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Label for the scheme column; derived from the transmitter if omitted.
    #[arg(long)]
    scheme: Option<String>,
    /// CSV output; a JSON sidecar is written next to it.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inputs {
    Shared,
    Independent,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(short = 'K', long = "nodes", default_value_t = 100)]
    k: u32,
    #[arg(short, long, num_args = 1.., default_values_t = [4usize, 32, 64, 128])]
    q: Vec<usize>,
    /// Lipschitz constant scaling the error axis.
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
}

#[derive(Args)]
struct FiguresArgs {
    /// fig2, fig3, fig5, fig7, fig8, or all.
    #[arg(long)]
    preset: String,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override the preset's Monte Carlo trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Standard constellation for the high-resolution scheme of fig8.
    #[arg(long, default_value_t = ModulationKind::Pam)]
    majority_modulation: ModulationKind,
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn enumerate(args: EnumerateArgs, limits: &Limits) -> Result<()> {
    if let Some(t) = args.transitions {
        let set = enumerate_transition_set(args.k, args.q, t[0], t[1], limits)?;
        let mut out = String::from("ell,pairs\n");
        for (ell, pairs) in &set.per_level {
            out.push_str(&format!("{ell},{}\n", pairs.len()));
        }
        print!("{out}");
        eprintln!("|S_{},{}| = {} (closed form {})", t[0], t[1], set.total(), transition_cardinality(args.k, args.q));
        return Ok(());
    }
    let set = SamplingSet::enumerate(args.k, args.q, args.p, limits)?;
    let mut out: String = (0..args.q).map(|j| format!("h{j},")).collect();
    out.push_str("set_size\n");
    for h in set.histograms() {
        for c in h.counts() {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{}\n", set.len()));
    }
    print!("{out}");
    eprintln!(
        "|Ω_{}| = {} for K = {}, q = {} (closed form {}, bound binom(K-p+q, q-1) = {})",
        args.p,
        set.len(),
        args.k,
        args.q,
        omega_cardinality(args.k, args.q, args.p),
        omega_cardinality_bound(args.k, args.q, args.p)
    );
    Ok(())
}

fn design(args: DesignArgs, workers: Workers, limits: &Limits) -> Result<()> {
    let f = FunctionSpec::from_name(&args.function)?;
    let levels = args.levels.values(args.q)?;
    let cs = if args.reduced {
        if args.p_prime.is_some() {
            bail!("--p-prime applies to the full constraint form only");
        }
        build_constraints_reduced_sampled(&f, args.k, args.q, args.p, &levels, limits)?
    } else {
        build_constraints_full(&f, args.k, args.q, args.p, args.p_prime, &levels, limits)?
    };
    let cfg = SolverConfig {
        restarts: args.restarts,
        iterations: args.iterations,
        seed: args.seed,
        workers,
        ..SolverConfig::default()
    };
    let result = solve_maxmin(&cs, args.q, &cfg)?;
    eprintln!("{} constraints, λ* = {:.6e}", cs.len(), result.lambda_star);
    let doc = DesignDocument::from_result(&result, args.k, f.name(), &levels, cs.form, &cfg);
    write_output(&args.out, &(doc.to_json()? + "\n"))
}

fn verify(args: VerifyArgs, limits: &Limits) -> Result<()> {
    let doc = DesignDocument::load(&args.design).with_context(|| format!("reading {}", args.design.display()))?;
    let f = FunctionSpec::from_name(&doc.function)?;
    let c = doc.constellation()?;
    let p = args.p.unwrap_or(doc.p);
    let report = verify_no_overlap(&c, &f, doc.k, p, &doc.levels, args.tol, limits)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.is_clean() {
        bail!("{} overlapping pairs among {} superimposed points", report.overlaps.len(), report.points);
    }
    Ok(())
}

fn modulation(args: ModulationArgs) -> Result<()> {
    let c = generate(ModulationSpec::new(args.kind, args.q))?;
    let rows: Vec<(usize, f64, f64)> = c.points().iter().enumerate().map(|(i, z)| (i, z.re, z.im)).collect();
    print!("{}", csv_string(&["index", "re", "im"], &rows)?);
    Ok(())
}

fn simulate(args: SimulateArgs, workers: Workers, limits: &Limits) -> Result<()> {
    let (transmitter, default_label) = match (&args.modulation, &args.design) {
        (Some(kind), None) => (Transmitter::Majority { modulation: *kind }, format!("{kind}{}", args.q)),
        (None, Some(path)) => (Transmitter::DesignFile { path: path.clone() }, format!("designed-q{}", args.q)),
        _ => bail!("give exactly one of --modulation and --design"),
    };
    let cfg = ExperimentConfig {
        scheme: args.scheme.unwrap_or(default_label),
        function: args.function,
        k: args.k,
        q: args.q,
        p: args.p,
        transmitter,
        inputs: match args.inputs {
            Inputs::Shared => InputModel::Shared,
            Inputs::Independent => InputModel::Independent,
        },
        snr: SnrGrid { start: args.snr_start, stop: args.snr_stop, step: args.snr_step },
        trials: args.trials,
        seed: args.seed,
    };
    let report = run_mse(&cfg, workers, limits)?;
    let columns = ["scheme", "function", "snr_db", "mse", "stderr", "trials"];
    match &args.out {
        Some(path) => {
            let mut meta = RunMetadata::new("simulate", cfg.seed, &columns, serde_json::to_value(&cfg)?);
            meta.notes.push(format!("power_scale = {}", report.power_scale));
            meta.notes.push(format!("decoder_collisions = {}", report.decoder_collisions));
            let name = path.file_stem().and_then(|s| s.to_str()).context("output path needs a file name")?.to_string();
            let dir = path.parent().map(PathBuf::from).unwrap_or_default();
            let art = Artifact::new(&name, &columns, &report.rows, &meta)?;
            fs::create_dir_all(if dir.as_os_str().is_empty() { ".".into() } else { dir.clone() })?;
            fs::write(path, &art.csv)?;
            fs::write(path.with_extension("json"), &art.metadata)?;
        }
        None => print!("{}", csv_string(&columns, &report.rows)?),
    }
    Ok(())
}

fn tradeoff(args: TradeoffArgs) -> Result<()> {
    let mut rows = Vec::new();
    for &q in &args.q {
        for pt in pyramid_oac::sampling::tradeoff_curve(args.k, q, args.lipschitz)? {
            rows.push(pyramid_oac::harness::TradeoffRow { q, p: pt.p, epsilon: pt.epsilon, delta_norm: pt.delta_norm });
        }
    }
    print!("{}", csv_string(&["q", "p", "epsilon", "delta_norm"], &rows)?);
    Ok(())
}

fn figures(args: FiguresArgs, workers: Workers, limits: &Limits) -> Result<()> {
    let presets = if args.preset == "all" { Preset::ALL.to_vec() } else { vec![args.preset.parse::<Preset>()?] };
    let opts = PresetOptions {
        seed: args.seed,
        workers,
        trials: args.trials,
        restarts: args.restarts,
        iterations: args.iterations,
        majority_modulation: args.majority_modulation,
        limits: *limits,
    };
    for preset in presets {
        log::info!("running {preset}");
        for art in run_preset(preset, &opts)? {
            art.write_to(&args.out_dir)?;
            eprintln!("wrote {}", art.csv_path(&args.out_dir).display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let workers = Workers::from_count(cli.workers);
    let limits = Limits { enumeration_cap: cli.enumeration_cap, ..Limits::default() };
    match cli.command {
        Command::Enumerate(a) => enumerate(a, &limits),
        Command::Design(a) => design(a, workers, &limits),
        Command::Verify(a) => verify(a, &limits),
        Command::Modulation(a) => modulation(a),
        Command::Simulate(a) => simulate(a, workers, &limits),
        Command::Tradeoff(a) => tradeoff(a),
        Command::Figures(a) => figures(a, workers, &limits),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
