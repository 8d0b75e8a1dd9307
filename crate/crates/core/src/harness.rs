//! Planted-instance experiments: ground truth in, noise in, correctors run,
//! reports out.
//!
//! A trial plants everything the theory quantifies over — a typical core
//! (rejection-sampled through the typicality checks), a uniform relabeling,
//! a noise realization, a target point — then runs the corrector against the
//! strict batch-only oracle and records what came back. The master seed fans
//! out to per-trial sub-seeds through a fixed splitting rule, so any single
//! trial can be reproduced in isolation and a report is a pure function of
//! its configuration.
//!
//! Failed trials carry a stage tag telling *which* of the proof's three
//! failure events happened: the random partition failed to separate the
//! distinguished variables, the set search returned the wrong blocks, or
//! the permutation scoring picked a wrong slot order. The tags partition
//! all failures, so reports can be compared against the analysis term by
//! term.

use std::collections::HashSet;
use std::fs::File;
use std::hash::Hasher;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use siphasher::sip128::{Hasher128, SipHasher13};

use crate::bits::BitVector;
use crate::boolfn::{FunctionView, Isomorphism, JuntaCore, PsfCore};
use crate::corrector::{
    locally_correct_junta, locally_correct_psf, ConstantsProfile, CorrectionTrace,
};
use crate::error::{Error, Result};
use crate::oracle::{make_oracle, NoiseSpec};
use crate::stats::clopper_pearson_lower;
use crate::typicality::{
    check_core_far_from_isomorphisms, check_core_min_influence, check_psf_far_from_core_perms,
    check_psf_pair_syminf, TypicalityCheck, TypicalityVerdict,
};

/// Schema tag marking every emitted report.
pub const REPORT_SCHEMA: &str = "locorr-report-v1";

/// Which target family an experiment plants.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Junta,
    Psf,
}

/// Noise construction, minus the per-trial seed (derived from the trial).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Materialized flip set of exactly `floor(epsilon 2^n)` points.
    ExactFraction,
    /// Keyed-hash membership test; works at any `n`.
    Procedural,
    /// Explicit flip points, hex-encoded at width `n`.
    Adversarial { points_hex: Vec<String> },
}

/// On-disk report format.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    /// Header line + one trial per line. The round-trippable format.
    Jsonl,
    /// Flat per-trial rows for spreadsheets; export-only.
    Csv,
}

fn default_typicality_budget() -> u64 {
    1000
}

fn default_mc_budget() -> u64 {
    20_000
}

fn default_workers() -> usize {
    1
}

/// Everything a run depends on. Echoed verbatim into the report header.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
    pub noise: NoiseKind,
    pub trials: u64,
    pub profile: ConstantsProfile,
    pub master_seed: u64,
    /// Reject-and-redraw random cores through the typicality checks.
    pub gate_typicality: bool,
    /// Redraw attempts per trial before giving up.
    #[serde(default = "default_typicality_budget")]
    pub typicality_budget: u64,
    /// Sample budget for Monte-Carlo typicality statistics above the exact
    /// cap.
    #[serde(default = "default_mc_budget")]
    pub typicality_mc_budget: u64,
    /// Majority vote over this many runs per trial. Off by default; the
    /// 2/3 guarantee is the claim under test, so acceptance runs never set
    /// it.
    #[serde(default)]
    pub amplification: Option<u32>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Where the caller intends to write the report, if anywhere.
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<ReportFormat>,
}

impl ExperimentConfig {
    /// A minimal valid config; callers adjust public fields from here.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        family: Family,
        k: usize,
        n: usize,
        epsilon: f64,
        noise: NoiseKind,
        trials: u64,
        profile: ConstantsProfile,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            family,
            k,
            n,
            epsilon,
            noise,
            trials,
            profile,
            master_seed,
            gate_typicality: true,
            typicality_budget: default_typicality_budget(),
            typicality_mc_budget: default_mc_budget(),
            amplification: None,
            workers: default_workers(),
            out: None,
            format: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n == 0 || self.k > self.n {
            return Err(Error::InvalidConfig(format!(
                "cannot plant k = {} distinguished variables in n = {}",
                self.k, self.n
            )));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "noise rate {} outside [0, 1)",
                self.epsilon
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if let Some(v) = self.amplification {
            if v == 0 || v % 2 == 0 {
                return Err(Error::InvalidConfig(
                    "amplification vote count must be odd and positive".into(),
                ));
            }
        }
        match &self.noise {
            NoiseKind::ExactFraction if self.n > crate::oracle::MAX_EXACT_FRACTION_VARS => {
                Err(Error::InvalidConfig(format!(
                    "exact-fraction noise cannot materialize flips at n = {}; use procedural",
                    self.n
                )))
            }
            NoiseKind::Adversarial { points_hex } => {
                for s in points_hex {
                    BitVector::from_hex(self.n, s).map_err(|e| {
                        Error::InvalidConfig(format!("adversarial point {s:?}: {e}"))
                    })?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn noise_spec(&self, seed: u64) -> NoiseSpec {
        match &self.noise {
            NoiseKind::ExactFraction => NoiseSpec::exact_fraction(self.epsilon, seed),
            NoiseKind::Procedural => NoiseSpec::procedural(self.epsilon, seed),
            NoiseKind::Adversarial { points_hex } => NoiseSpec::adversarial(
                points_hex
                    .iter()
                    .map(|s| BitVector::from_hex(self.n, s).expect("validated at config time"))
                    .collect(),
            ),
        }
    }
}

/// Which stage of a failed trial broke first.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageTag {
    /// The random partition put two distinguished variables in one block
    /// (or one into the workspace), so no block set could have been right.
    PartitionCollision,
    /// The partition was fine but the search returned the wrong blocks.
    SetFinder,
    /// Right blocks, wrong answer: the scoring stage chose a bad slot
    /// order.
    Permutation,
    /// The trial succeeded.
    None,
}

/// One planted trial, fully reproducible from its sub-seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: u64,
    pub sub_seed: u64,
    /// 128-bit keyed digest of the planted relabeling (the permutation
    /// itself would dwarf the row at large `n`).
    pub sigma_digest: String,
    pub x: BitVector,
    pub expected: bool,
    pub returned: bool,
    pub success: bool,
    pub queries: u64,
    pub stage: StageTag,
    /// Milliseconds spent in the corrector. Not serialized: reports must be
    /// byte-identical across equal-seed runs, and wall time never is.
    #[serde(skip)]
    pub wall_ms: f64,
}

impl PartialEq for TrialReport {
    /// Wall time is measurement noise, not trial identity.
    fn eq(&self, other: &Self) -> bool {
        self.trial == other.trial
            && self.sub_seed == other.sub_seed
            && self.sigma_digest == other.sigma_digest
            && self.x == other.x
            && self.expected == other.expected
            && self.returned == other.returned
            && self.success == other.success
            && self.queries == other.queries
            && self.stage == other.stage
    }
}

/// Failure counts by stage; the three counts plus successes total `trials`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct StageCounts {
    pub partition_collision: u64,
    pub set_finder: u64,
    pub permutation: u64,
}

/// A full experiment: config echo, per-trial rows, and aggregates.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub successes: u64,
    pub success_rate: f64,
    /// One-sided 95% lower confidence bound on the success probability.
    pub success_lower_95: f64,
    pub queries_min: u64,
    pub queries_max: u64,
    pub queries_mean: f64,
    pub stage_failures: StageCounts,
    /// Cores rejected by typicality gating across all trials.
    pub typicality_rejections: u64,
    pub trials: Vec<TrialReport>,
}

/// Per-trial sub-seed: element `trial` of a splitmix64 stream started at
/// the master seed. Documented so a single trial can be replayed without
/// the harness.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    let mut z =
        master_seed.wrapping_add((trial.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed 128-bit digest identifying a relabeling in reports.
pub fn sigma_digest(sigma: &Isomorphism) -> String {
    let mut h = SipHasher13::new_with_keys(0x6c6f_636f_7272, 0x0073_6967_6d61);
    h.write_u64(sigma.n() as u64);
    for &v in sigma.as_slice() {
        h.write_u64(v as u64);
    }
    let d = h.finish128();
    format!("{:016x}{:016x}", d.h1, d.h2)
}

/// Draw junta cores until one passes every applicable typicality check.
fn draw_typical_junta_core(
    k: usize,
    budget: u64,
    gate: bool,
    rng: &mut impl Rng,
) -> Result<(JuntaCore, u64)> {
    let mut rejections = 0;
    loop {
        let core = JuntaCore::random(k, rng)?;
        if !gate || junta_core_verdicts(&core)?.iter().all(|v| v.pass) {
            return Ok((core, rejections));
        }
        rejections += 1;
        if rejections >= budget {
            return Err(Error::TypicalityBudgetExhausted {
                attempts: rejections,
            });
        }
    }
}

/// All typicality checks that apply to a junta core at this arity.
pub fn junta_core_verdicts(core: &JuntaCore) -> Result<Vec<TypicalityVerdict>> {
    let mut out = vec![check_core_min_influence(core)];
    if core.k() <= 8 {
        out.push(check_core_far_from_isomorphisms(core)?);
    }
    Ok(out)
}

/// Draw partially symmetric cores until one passes every applicable check.
fn draw_typical_psf_core(
    k: usize,
    n: usize,
    budget: u64,
    mc_budget: u64,
    gate: bool,
    rng: &mut impl Rng,
) -> Result<(PsfCore, u64)> {
    let mut rejections = 0;
    loop {
        let core = PsfCore::random(k, n - k, rng)?;
        if !gate
            || psf_core_verdicts(&core, n, mc_budget, rng)?
                .iter()
                .all(|v| v.pass)
        {
            return Ok((core, rejections));
        }
        rejections += 1;
        if rejections >= budget {
            return Err(Error::TypicalityBudgetExhausted {
                attempts: rejections,
            });
        }
    }
}

/// All typicality checks that apply to a partially symmetric core. The pair
/// statistic is permutation-invariant, so the canonical embedding at
/// positions `0..k` stands in for the planted one.
pub fn psf_core_verdicts(
    core: &PsfCore,
    n: usize,
    mc_budget: u64,
    rng: &mut impl Rng,
) -> Result<Vec<TypicalityVerdict>> {
    let positions: Vec<usize> = (0..core.k()).collect();
    let mut out = vec![check_psf_pair_syminf(core, &positions, n, mc_budget, rng)];
    if core.k() <= 8 {
        out.push(check_psf_far_from_core_perms(core, n)?);
    }
    Ok(out)
}

/// Sort the blocks hosting the distinguished variables; `None` when two
/// share a block or one sits in the workspace — the partition-collision
/// event.
fn true_blocks(trace: &CorrectionTrace, true_vars: &[usize]) -> Option<Vec<usize>> {
    let p = &trace.partition;
    let mut blocks = HashSet::new();
    for &v in true_vars {
        let b = p.block_of(v)?;
        if Some(b) == p.workspace() || !blocks.insert(b) {
            return None;
        }
    }
    let mut blocks: Vec<usize> = blocks.into_iter().collect();
    blocks.sort_unstable();
    Some(blocks)
}

/// Assign a failed trial to exactly one proof stage.
fn classify_failure(trace: &CorrectionTrace, true_vars: &[usize]) -> StageTag {
    match true_blocks(trace, true_vars) {
        None => StageTag::PartitionCollision,
        Some(blocks) if trace.returned_blocks != blocks => StageTag::SetFinder,
        Some(_) => StageTag::Permutation,
    }
}

struct TrialOutcome {
    report: TrialReport,
    rejections: u64,
}

fn run_one_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialOutcome> {
    let sub_seed = trial_seed(cfg.master_seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);

    // Fixed draw order — core, relabeling, target point, noise seed — so the
    // sub-seed alone replays the trial.
    enum Core {
        Junta(JuntaCore),
        Psf(PsfCore),
    }
    let (core, rejections) = match cfg.family {
        Family::Junta => {
            let (c, rej) = draw_typical_junta_core(
                cfg.k,
                cfg.typicality_budget,
                cfg.gate_typicality,
                &mut rng,
            )?;
            (Core::Junta(c), rej)
        }
        Family::Psf => {
            let (c, rej) = draw_typical_psf_core(
                cfg.k,
                cfg.n,
                cfg.typicality_budget,
                cfg.typicality_mc_budget,
                cfg.gate_typicality,
                &mut rng,
            )?;
            (Core::Psf(c), rej)
        }
    };
    let sigma = Isomorphism::random(cfg.n, &mut rng);
    let x = BitVector::random(cfg.n, &mut rng);
    let noise = cfg.noise_spec(rng.random());

    let positions: Vec<usize> = (0..cfg.k).collect();
    let f = match &core {
        Core::Junta(c) => FunctionView::junta(cfg.n, c.clone(), positions.clone())?,
        Core::Psf(c) => FunctionView::psf(cfg.n, c.clone(), positions.clone())?,
    };
    let oracle = make_oracle(&f, &sigma, &noise)?.strict();
    let expected = f.apply_isomorphism(&sigma)?.eval(&x);
    let true_vars: Vec<usize> = positions.iter().map(|&p| sigma.map(p)).collect();

    let votes = cfg.amplification.unwrap_or(1);
    let started = std::time::Instant::now();
    let mut ones = 0u32;
    let mut last_trace: Option<CorrectionTrace> = None;
    for _ in 0..votes {
        let (bit, trace) = match &core {
            Core::Junta(c) => locally_correct_junta(c, &oracle, &x, &cfg.profile, &mut rng)?,
            Core::Psf(c) => locally_correct_psf(c, &oracle, &x, &cfg.profile, &mut rng)?,
        };
        ones += u32::from(bit);
        last_trace = Some(trace);
    }
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let returned = 2 * ones > votes;
    let success = returned == expected;
    let trace = last_trace.expect("at least one vote runs");
    let stage = if success {
        StageTag::None
    } else {
        classify_failure(&trace, &true_vars)
    };

    Ok(TrialOutcome {
        report: TrialReport {
            trial,
            sub_seed,
            sigma_digest: sigma_digest(&sigma),
            x,
            expected,
            returned,
            success,
            queries: oracle.query_count(),
            stage,
            wall_ms,
        },
        rejections,
    })
}

fn aggregate(cfg: &ExperimentConfig, outcomes: Vec<TrialOutcome>) -> ExperimentReport {
    let trials: Vec<TrialReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    let successes = trials.iter().filter(|t| t.success).count() as u64;
    let mut stage_failures = StageCounts::default();
    for t in &trials {
        match t.stage {
            StageTag::PartitionCollision => stage_failures.partition_collision += 1,
            StageTag::SetFinder => stage_failures.set_finder += 1,
            StageTag::Permutation => stage_failures.permutation += 1,
            StageTag::None => {}
        }
    }
    let total = trials.len() as u64;
    let queries_min = trials.iter().map(|t| t.queries).min().unwrap_or(0);
    let queries_max = trials.iter().map(|t| t.queries).max().unwrap_or(0);
    let queries_mean = trials.iter().map(|t| t.queries as f64).sum::<f64>() / (total.max(1)) as f64;
    ExperimentReport {
        schema: REPORT_SCHEMA.into(),
        config: cfg.clone(),
        successes,
        success_rate: successes as f64 / total as f64,
        success_lower_95: clopper_pearson_lower(successes, total, 0.95),
        queries_min,
        queries_max,
        queries_mean,
        stage_failures,
        typicality_rejections: outcomes.iter().map(|o| o.rejections).sum(),
        trials,
    }
}

fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let ids: Vec<u64> = (0..cfg.trials).collect();
    let outcomes: Vec<TrialOutcome> = if cfg.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        use rayon::prelude::*;
        pool.install(|| {
            ids.par_iter()
                .map(|&t| run_one_trial(cfg, t))
                .collect::<Result<_>>()
        })?
    } else {
        ids.iter()
            .map(|&t| run_one_trial(cfg, t))
            .collect::<Result<_>>()?
    };
    Ok(aggregate(cfg, outcomes))
}

/// Run a planted junta experiment. Each trial draws a gated random core, a
/// uniform relabeling, a noise realization, and a uniform target point,
/// then asks the corrector for `f_sigma(x)`.
pub fn run_junta_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.family != Family::Junta {
        return Err(Error::InvalidConfig("config family is not junta".into()));
    }
    run_experiment(cfg)
}

/// Run a planted partially-symmetric experiment; see
/// [`run_junta_experiment`].
pub fn run_psf_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.family != Family::Psf {
        return Err(Error::InvalidConfig("config family is not psf".into()));
    }
    run_experiment(cfg)
}

/// Pass counts and raw statistics for one typicality check across many
/// drawn cores.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CheckAggregate {
    pub check: TypicalityCheck,
    pub evaluated: u64,
    pub passes: u64,
    /// Measured statistic per core, `None` where the check was vacuous.
    pub statistics: Vec<Option<f64>>,
}

/// Typicality pass rates over freshly drawn random cores.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TypicalitySuiteReport {
    pub schema: String,
    pub family: Family,
    pub k: usize,
    pub n: usize,
    pub draws: u64,
    pub master_seed: u64,
    pub checks: Vec<CheckAggregate>,
}

/// Draw `cfg.trials` random cores of the configured family and size and
/// run every applicable typicality check on each.
pub fn run_typicality_suite(cfg: &ExperimentConfig) -> Result<TypicalitySuiteReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    let mut checks: Vec<CheckAggregate> = Vec::new();
    let mut record = |verdicts: Vec<TypicalityVerdict>| {
        for v in verdicts {
            let slot = match checks.iter_mut().find(|c| c.check == v.check) {
                Some(c) => c,
                None => {
                    checks.push(CheckAggregate {
                        check: v.check,
                        evaluated: 0,
                        passes: 0,
                        statistics: Vec::new(),
                    });
                    checks.last_mut().expect("just pushed")
                }
            };
            slot.evaluated += 1;
            slot.passes += u64::from(v.pass);
            slot.statistics.push(v.statistic);
        }
    };
    for _ in 0..cfg.trials {
        match cfg.family {
            Family::Junta => {
                let core = JuntaCore::random(cfg.k, &mut rng)?;
                record(junta_core_verdicts(&core)?);
            }
            Family::Psf => {
                let core = PsfCore::random(cfg.k, cfg.n - cfg.k, &mut rng)?;
                record(psf_core_verdicts(
                    &core,
                    cfg.n,
                    cfg.typicality_mc_budget,
                    &mut rng,
                )?);
            }
        }
    }
    Ok(TypicalitySuiteReport {
        schema: REPORT_SCHEMA.into(),
        family: cfg.family,
        k: cfg.k,
        n: cfg.n,
        draws: cfg.trials,
        master_seed: cfg.master_seed,
        checks,
    })
}

/// The JSONL header line: everything but the per-trial rows.
#[derive(Serialize, Deserialize)]
struct ReportHeader {
    schema: String,
    config: ExperimentConfig,
    successes: u64,
    success_rate: f64,
    success_lower_95: f64,
    queries_min: u64,
    queries_max: u64,
    queries_mean: f64,
    stage_failures: StageCounts,
    typicality_rejections: u64,
    trial_rows: u64,
}

fn io_ctx(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::ReportIo {
        path: path.display().to_string(),
        source,
    }
}

/// Write a report. JSONL (header line, then one line per trial) is the
/// format [`parse_experiment_report`] reads back; CSV is a flat export of
/// the trial rows behind a schema comment line.
pub fn emit_report(report: &ExperimentReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(io_ctx(path))?;
    let mut w = BufWriter::new(file);
    match format {
        ReportFormat::Jsonl => {
            let header = ReportHeader {
                schema: report.schema.clone(),
                config: report.config.clone(),
                successes: report.successes,
                success_rate: report.success_rate,
                success_lower_95: report.success_lower_95,
                queries_min: report.queries_min,
                queries_max: report.queries_max,
                queries_mean: report.queries_mean,
                stage_failures: report.stage_failures,
                typicality_rejections: report.typicality_rejections,
                trial_rows: report.trials.len() as u64,
            };
            let mut line = serde_json::to_string(&header)?;
            line.push('\n');
            w.write_all(line.as_bytes()).map_err(io_ctx(path))?;
            for t in &report.trials {
                let mut line = serde_json::to_string(t)?;
                line.push('\n');
                w.write_all(line.as_bytes()).map_err(io_ctx(path))?;
            }
        }
        ReportFormat::Csv => {
            w.write_all(format!("# {}\n", report.schema).as_bytes())
                .map_err(io_ctx(path))?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record([
                "trial",
                "sub_seed",
                "sigma_digest",
                "x_hex",
                "expected",
                "returned",
                "success",
                "queries",
                "stage",
            ])?;
            for t in &report.trials {
                let stage = serde_json::to_value(t.stage)?;
                csv.write_record([
                    t.trial.to_string(),
                    t.sub_seed.to_string(),
                    t.sigma_digest.clone(),
                    t.x.to_hex(),
                    t.expected.to_string(),
                    t.returned.to_string(),
                    t.success.to_string(),
                    t.queries.to_string(),
                    stage
                        .as_str()
                        .expect("stage serializes to a string")
                        .to_string(),
                ])?;
            }
            csv.flush().map_err(io_ctx(path))?;
            return Ok(());
        }
    }
    w.flush().map_err(io_ctx(path))?;
    Ok(())
}

/// Read back a JSONL report written by [`emit_report`].
pub fn parse_experiment_report(path: &Path) -> Result<ExperimentReport> {
    let file = File::open(path).map_err(io_ctx(path))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Report(format!("{}: empty file", path.display())))?
        .map_err(io_ctx(path))?;
    let header: ReportHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Report(format!("{}: bad header: {e}", path.display())))?;
    if header.schema != REPORT_SCHEMA {
        return Err(Error::Report(format!(
            "{}: schema {:?}, expected {REPORT_SCHEMA:?}",
            path.display(),
            header.schema
        )));
    }
    let mut trials = Vec::with_capacity(header.trial_rows as usize);
    for line in lines {
        let line = line.map_err(io_ctx(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TrialReport = serde_json::from_str(&line)
            .map_err(|e| Error::Report(format!("{}: bad trial row: {e}", path.display())))?;
        trials.push(t);
    }
    if trials.len() as u64 != header.trial_rows {
        return Err(Error::Report(format!(
            "{}: header promises {} trial rows, found {}",
            path.display(),
            header.trial_rows,
            trials.len()
        )));
    }
    Ok(ExperimentReport {
        schema: header.schema,
        config: header.config,
        successes: header.successes,
        success_rate: header.success_rate,
        success_lower_95: header.success_lower_95,
        queries_min: header.queries_min,
        queries_max: header.queries_max,
        queries_mean: header.queries_mean,
        stage_failures: header.stage_failures,
        typicality_rejections: header.typicality_rejections,
        trials,
    })
}
