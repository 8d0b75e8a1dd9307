//! `locorr` — plant a hidden Boolean function, corrupt it, and correct it.
//!
//! Every subcommand is seeded and deterministic at `--workers 1`: the same
//! invocation produces byte-identical output. Exit codes: 0 on success, 1
//! when a correction or a requested acceptance threshold fails, 2 on
//! invalid parameters or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use locorr::harness::{emit_report, run_typicality_suite, NoiseKind};
use locorr::{
    estimate_influence, estimate_symmetric_influence, influence_exact, make_oracle,
    run_junta_experiment, run_psf_experiment, symmetric_influence_exact, BitVector,
    ConstantsProfile, EstimatorParams, ExperimentConfig, Family, FunctionView, Isomorphism,
    JuntaCore, NoiseSpec, PsfCore, ReportFormat, VarSet,
};

#[derive(Parser)]
#[command(
    name = "locorr",
    version,
    about = "Local correction of Boolean functions known up to variable relabeling",
    long_about = "Plants a hidden junta or partially symmetric function, serves a corrupted \
                  version of it behind a batch-query oracle, and runs the local correctors \
                  against it. All randomness derives from --seed; single-worker runs are \
                  bit-reproducible."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correct one planted junta instance and print the trial record.
    CorrectJunta(SingleArgs),
    /// Correct one planted partially symmetric instance and print the trial record.
    CorrectPsf(SingleArgs),
    /// Run a seeded multi-trial correction experiment and aggregate the results.
    Experiment(ExperimentArgs),
    /// Measure typicality-check pass rates over freshly drawn random cores.
    Typicality(TypicalityArgs),
    /// One-off influence / symmetric-influence estimation on a planted instance.
    Estimate(EstimateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    /// Function of k of the n variables.
    Junta,
    /// Function symmetric in all but k of the n variables.
    Psf,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Junta => Family::Junta,
            FamilyArg::Psf => Family::Psf,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Header line plus one trial per line; round-trippable.
    Jsonl,
    /// Flat rows for spreadsheets; export-only.
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> ReportFormat {
        match f {
            FormatArg::Jsonl => ReportFormat::Jsonl,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

/// Parameters that describe the planted instance and its corruption.
#[derive(Args)]
struct PlantArgs {
    /// Core arity: distinguished-variable count of the hidden function.
    #[arg(long)]
    k: usize,
    /// Ambient dimension.
    #[arg(long)]
    n: usize,
    /// Corruption rate of the served function.
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    /// Noise model: "exact", "procedural", or "adversarial:FILE" (one
    /// hex-encoded point per line, width n).
    #[arg(long, default_value = "procedural", value_parser = parse_noise)]
    noise: NoiseKind,
    /// Constant schedule: "paper" or "scaled:FACTOR".
    #[arg(long, default_value = "paper", value_parser = parse_profile)]
    profile: ConstantsProfile,
    /// Master seed; trials derive their sub-seeds from it.
    #[arg(long, env = "LOCORR_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    plant: PlantArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Which family to plant.
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[command(flatten)]
    plant: PlantArgs,
    /// Number of seeded trials.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Parallel trial workers; 1 keeps the run bit-deterministic.
    #[arg(long, env = "LOCORR_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Write the full per-trial report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// On-disk format for --out.
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    /// Exit nonzero unless the one-sided 95% lower confidence bound on the
    /// success rate reaches this value.
    #[arg(long)]
    require_success_lower: Option<f64>,
    /// Plant raw random cores instead of rejection-sampling them through
    /// the typicality checks.
    #[arg(long)]
    no_typicality_gate: bool,
    /// Majority vote over this many correction runs per trial (odd).
    /// Off by default: the bare 2/3 guarantee is the claim under test.
    #[arg(long)]
    amplify: Option<u32>,
}

#[derive(Args)]
struct TypicalityArgs {
    /// Which family of cores to draw.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Core arity.
    #[arg(long)]
    k: usize,
    /// Ambient dimension (sets the symmetric side m = n - k for psf cores).
    #[arg(long)]
    n: usize,
    /// Number of random cores to draw.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Master seed.
    #[arg(long, env = "LOCORR_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the full suite report (per-core statistics) to this path as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero unless every check's pass rate reaches this value.
    #[arg(long)]
    require_pass_rate: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Which family to plant.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Core arity.
    #[arg(long)]
    k: usize,
    /// Ambient dimension.
    #[arg(long)]
    n: usize,
    /// Corruption rate of the served function.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Noise model, as for the other subcommands.
    #[arg(long, default_value = "procedural", value_parser = parse_noise)]
    noise: NoiseKind,
    /// Master seed.
    #[arg(long, env = "LOCORR_SEED", default_value_t = 0)]
    seed: u64,
    /// Variable set J: comma-separated indices into the ambient space.
    #[arg(long, value_delimiter = ',', required = true)]
    vars: Vec<usize>,
    /// Estimator accuracy delta.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Estimator failure probability eta.
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
}

fn parse_noise(s: &str) -> Result<NoiseKind, String> {
    match s {
        "exact" | "exact-fraction" => Ok(NoiseKind::ExactFraction),
        "procedural" => Ok(NoiseKind::Procedural),
        _ => match s.strip_prefix("adversarial:") {
            Some(path) if !path.is_empty() => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read flip-point file {path}: {e}"))?;
                let points_hex: Vec<String> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(String::from)
                    .collect();
                Ok(NoiseKind::Adversarial { points_hex })
            }
            _ => Err(format!(
                "unknown noise model {s:?}; expected \"exact\", \"procedural\", or \
                 \"adversarial:FILE\""
            )),
        },
    }
}

fn parse_profile(s: &str) -> Result<ConstantsProfile, String> {
    match s {
        "paper" => Ok(ConstantsProfile::paper()),
        _ => match s.strip_prefix("scaled:") {
            Some(factor) => {
                let factor: u32 = factor
                    .parse()
                    .map_err(|e| format!("bad scale factor {factor:?}: {e}"))?;
                ConstantsProfile::scaled(factor).map_err(|e| e.to_string())
            }
            None => Err(format!(
                "unknown profile {s:?}; expected \"paper\" or \"scaled:FACTOR\""
            )),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::CorrectJunta(args) => run_single(Family::Junta, args),
        Command::CorrectPsf(args) => run_single(Family::Psf, args),
        Command::Experiment(args) => run_experiment(args),
        Command::Typicality(args) => run_typicality(args),
        Command::Estimate(args) => run_estimate(args),
    }
}

fn base_config(family: Family, plant: &PlantArgs, trials: u64) -> ExperimentConfig {
    ExperimentConfig::new(
        family,
        plant.k,
        plant.n,
        plant.epsilon,
        plant.noise.clone(),
        trials,
        plant.profile.clone(),
        plant.seed,
    )
}

fn run_single(family: Family, args: SingleArgs) -> anyhow::Result<ExitCode> {
    let cfg = base_config(family, &args.plant, 1);
    let report = match family {
        Family::Junta => run_junta_experiment(&cfg)?,
        Family::Psf => run_psf_experiment(&cfg)?,
    };
    let trial = report
        .trials
        .first()
        .context("experiment produced no trial record")?;
    println!("{}", serde_json::to_string_pretty(trial)?);
    Ok(ExitCode::from(u8::from(!trial.success)))
}

fn run_experiment(args: ExperimentArgs) -> anyhow::Result<ExitCode> {
    let family = Family::from(args.family);
    let mut cfg = base_config(family, &args.plant, args.trials);
    cfg.workers = args.workers;
    cfg.gate_typicality = !args.no_typicality_gate;
    cfg.amplification = args.amplify;
    // Recorded in the report header so a report names its own destination.
    cfg.out = args.out.as_ref().map(|p| p.display().to_string());
    cfg.format = args.out.is_some().then_some(args.format.into());

    let report = match family {
        Family::Junta => run_junta_experiment(&cfg)?,
        Family::Psf => run_psf_experiment(&cfg)?,
    };
    if let Some(path) = &args.out {
        emit_report(&report, path, args.format.into())?;
    }

    let queries: Vec<u64> = report.trials.iter().map(|t| t.queries).collect();
    let summary = json!({
        "schema": report.schema,
        "family": family,
        "k": cfg.k,
        "n": cfg.n,
        "epsilon": cfg.epsilon,
        "noise": cfg.noise,
        "profile": cfg.profile.name,
        "seed": cfg.master_seed,
        "trials": args.trials,
        "successes": report.successes,
        "success_rate": report.success_rate,
        "success_lower_95": report.success_lower_95,
        "queries": {
            "min": queries.iter().min(),
            "max": queries.iter().max(),
            "mean": queries.iter().sum::<u64>() as f64 / queries.len().max(1) as f64,
        },
        "stage_failures": report.stage_failures,
        "typicality_rejections": report.typicality_rejections,
        "out": cfg.out,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);

    if let Some(threshold) = args.require_success_lower {
        if report.success_lower_95 < threshold {
            eprintln!(
                "acceptance failure: success lower bound {:.4} < required {threshold}",
                report.success_lower_95
            );
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_typicality(args: TypicalityArgs) -> anyhow::Result<ExitCode> {
    let cfg = ExperimentConfig::new(
        Family::from(args.family),
        args.k,
        args.n,
        0.0,
        NoiseKind::Procedural,
        args.trials,
        ConstantsProfile::paper(),
        args.seed,
    );
    let suite = run_typicality_suite(&cfg)?;
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&suite)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let checks: Vec<_> = suite
        .checks
        .iter()
        .map(|c| {
            json!({
                "check": c.check,
                "evaluated": c.evaluated,
                "passes": c.passes,
                "pass_rate": c.passes as f64 / c.evaluated.max(1) as f64,
            })
        })
        .collect();
    let summary = json!({
        "schema": suite.schema,
        "family": suite.family,
        "k": suite.k,
        "n": suite.n,
        "draws": suite.draws,
        "seed": suite.master_seed,
        "checks": checks,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);

    if let Some(threshold) = args.require_pass_rate {
        for c in &suite.checks {
            let rate = c.passes as f64 / c.evaluated.max(1) as f64;
            if rate < threshold {
                eprintln!(
                    "acceptance failure: {:?} pass rate {rate:.4} < required {threshold}",
                    c.check
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_estimate(args: EstimateArgs) -> anyhow::Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let f = match Family::from(args.family) {
        Family::Junta => {
            let core = JuntaCore::random(args.k, &mut rng)?;
            let positions = rand::seq::index::sample(&mut rng, args.n, args.k).into_vec();
            FunctionView::junta(args.n, core, positions)?
        }
        Family::Psf => {
            if args.k >= args.n {
                bail!("a partially symmetric instance needs k < n");
            }
            let core = PsfCore::random(args.k, args.n - args.k, &mut rng)?;
            let positions = rand::seq::index::sample(&mut rng, args.n, args.k).into_vec();
            FunctionView::psf(args.n, core, positions)?
        }
    };
    let sigma = Isomorphism::random(args.n, &mut rng);
    let noise = match &args.noise {
        NoiseKind::ExactFraction => NoiseSpec::exact_fraction(args.epsilon, rng.random()),
        NoiseKind::Procedural => NoiseSpec::procedural(args.epsilon, rng.random()),
        NoiseKind::Adversarial { points_hex } => {
            let points = points_hex
                .iter()
                .map(|h| BitVector::from_hex(args.n, h))
                .collect::<locorr::Result<Vec<_>>>()?;
            NoiseSpec::adversarial(points)
        }
    };
    let oracle = make_oracle(&f, &sigma, &noise)?.strict();
    let j = VarSet::new(args.vars.clone())?;
    if j.indices()
        .iter()
        .max()
        .copied()
        .expect("vars is non-empty")
        >= args.n
    {
        bail!("variable index out of range for n = {}", args.n);
    }
    let params = EstimatorParams::new(args.delta, args.eta)?;

    let est_inf = estimate_influence(&oracle, &j, &params, &mut rng);
    let est_sym = estimate_symmetric_influence(&oracle, &j, &params, &mut rng);

    // Exact reference values of the clean planted target, where brute force
    // is feasible. The estimates see the corrupted function, which the
    // perturbation law keeps within 2 * epsilon of these.
    let (exact_inf, exact_sym) = if args.n <= locorr::influence::MAX_EXACT_INFLUENCE_VARS {
        let planted = f.apply_isomorphism(&sigma)?;
        (
            Some(influence_exact(&planted, &j)?),
            Some(symmetric_influence_exact(&planted, &j)?),
        )
    } else {
        (None, None)
    };

    let out = json!({
        "family": Family::from(args.family),
        "k": args.k,
        "n": args.n,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "vars": j.indices(),
        "delta": params.delta,
        "eta": params.eta,
        "rounds": params.rounds(),
        "influence": { "estimate": est_inf, "exact_clean": exact_inf },
        "symmetric_influence": { "estimate": est_sym, "exact_clean": exact_sym },
        "queries": oracle.query_count(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}
