//! The local correctors and the influencing-set search they share.
//!
//! Given query access to `g` — an `epsilon`-corruption of `f_sigma` for a
//! *known* core but *unknown* relabeling `sigma` — the correctors recover
//! `f_sigma(x)` at one chosen point. The shape is the same for both families:
//!
//! 1. Split the variables by the bits of `x` (so that every query can agree
//!    with `x` on whole blocks), partition each side randomly, and for the
//!    partially symmetric family set aside a small random workspace.
//! 2. Find the blocks that matter: repeatedly estimate the (symmetric)
//!    influence of a random union of blocks and discard the union when the
//!    estimate is at most `3 * eps`. What survives, for typical cores, is
//!    exactly the `k` blocks holding the distinguished variables — without
//!    ever learning *which* variable inside each block is the real one.
//! 3. Pick the lowest-index representative of each surviving block. Queries
//!    drawn constant-on-blocks cannot tell a representative from the true
//!    variable, so it remains only to learn the *slot order*: score every
//!    candidate slot permutation against structured samples and keep the
//!    best.
//! 4. Answer by evaluating the core on `x` read through the winning
//!    representatives.
//!
//! Everything random is drawn before the first query, and all queries flow
//! through batch answers, so the correctors run unchanged against strict
//! batch-only oracles — non-adaptivity is structural, not a convention.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{gather_bits, permute_slots, BitVector, PointMatrix};
use crate::boolfn::{JuntaCore, PsfCore};
use crate::error::{Error, Result};
use crate::influence::{
    estimate_influence_into, estimate_symmetric_influence_into, EstimatorParams, VarSet,
};
use crate::oracle::Oracle;
use crate::sampling::{random_partition, sample_merged, Partition, WorkspaceSampler};

/// The constant schedule driving a correction run.
///
/// The `paper` profile reproduces the published constants verbatim:
/// per-side partition sizes `400k^2` (junta) and `100k^2` (partially
/// symmetric), `ceil(12 k ln s)` set-search rounds over `s` total blocks,
/// `2500 * ceil(k log2 k)` permutation-scoring samples, set-search accuracy
/// `eps = 0.01` with per-round confidence `eta = 1/(20r)`, and the `3 eps`
/// discard threshold. Scaled profiles divide the partition sizes and sample
/// counts by a recorded factor for desk-scale runs; the factor travels in
/// the profile name so reports stay honest about it.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ConstantsProfile {
    /// "paper", or "scaled:F" with optional "+eps=E" when the set-search
    /// accuracy was overridden.
    pub name: String,
    /// Divisor applied to per-side partition sizes.
    pub partition_divisor: u32,
    /// Divisor applied to permutation-scoring sample counts.
    pub sample_divisor: u32,
    /// Accuracy handed to the set search (the discard threshold is 3x this).
    pub set_finder_eps: f64,
    /// Largest arity whose `k!` permutation scan this profile will attempt.
    pub perm_scan_budget: usize,
}

impl ConstantsProfile {
    pub fn paper() -> Self {
        ConstantsProfile {
            name: "paper".into(),
            partition_divisor: 1,
            sample_divisor: 1,
            set_finder_eps: 0.01,
            perm_scan_budget: 8,
        }
    }

    /// Divide partition sizes and sample counts by `factor`. The guarantees
    /// degrade accordingly; use for continuous-integration scale runs.
    pub fn scaled(factor: u32) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter(
                "scale factor must be at least 1".into(),
            ));
        }
        Ok(ConstantsProfile {
            name: format!("scaled:{factor}"),
            partition_divisor: factor,
            sample_divisor: factor,
            set_finder_eps: 0.01,
            perm_scan_budget: 10,
        })
    }

    /// Override the set-search accuracy (desk-scale knob; the override is
    /// recorded in the profile name).
    pub fn with_set_finder_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0 / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "set-search accuracy {eps} outside (0, 1/3)"
            )));
        }
        self.set_finder_eps = eps;
        self.name = format!("{}+eps={eps}", self.name);
        Ok(self)
    }

    fn side_parts(&self, base: usize, k: usize) -> usize {
        let mut parts = (base * k * k / self.partition_divisor as usize).max(4);
        parts += parts & 1; // balanced draws need an even side
        parts
    }

    /// Blocks per side for the junta corrector (`400 k^2` under `paper`).
    pub fn junta_side_parts(&self, k: usize) -> usize {
        self.side_parts(400, k)
    }

    /// Blocks per side for the partially symmetric corrector (`100 k^2`).
    pub fn psf_side_parts(&self, k: usize) -> usize {
        self.side_parts(100, k)
    }

    /// Set-search rounds over a partition with `total_blocks` blocks.
    pub fn set_rounds(&self, k: usize, total_blocks: usize) -> u64 {
        (12.0 * k as f64 * (total_blocks as f64).ln()).ceil() as u64
    }

    /// Permutation-scoring samples: `2500 * ceil(k log2 k)`, scaled.
    pub fn perm_samples(&self, k: usize) -> u64 {
        if k <= 1 {
            return 0;
        }
        let base = 2500 * (k as f64 * (k as f64).log2()).ceil() as u64;
        base / self.sample_divisor as u64
    }

    fn check_perm_budget(&self, k: usize) -> Result<()> {
        if k > self.perm_scan_budget {
            return Err(Error::PermutationBudget {
                k,
                max: self.perm_scan_budget,
            });
        }
        Ok(())
    }
}

/// Why a correction run gave up before the scoring stage.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    /// The set search returned a number of blocks other than `k`.
    WrongBlockCount,
    /// A returned block holds no variables.
    EmptyBlock,
    /// The workspace itself came back as influential.
    WorkspaceReturned,
}

/// Everything a correction run decided, for debugging and reports.
#[derive(Clone, Debug, Serialize)]
pub struct CorrectionTrace {
    pub partition: Partition,
    pub returned_blocks: Vec<usize>,
    pub representatives: Vec<usize>,
    /// Match counts per candidate permutation, in lexicographic order.
    pub perm_scores: Vec<u64>,
    pub chosen_perm: Option<Vec<usize>>,
    pub queries: u64,
    pub output: bool,
    pub abort: Option<AbortReason>,
}

enum Measure {
    Influence,
    Symmetric,
}

/// Shared survivor loop: a block survives only if every random union it
/// joined kept a (symmetric-)influence estimate above `3 * eps`.
fn run_set_search(
    oracle: &Oracle,
    p: &Partition,
    k: usize,
    eps: f64,
    rng: &mut impl Rng,
    measure: Measure,
) -> Vec<usize> {
    let s = p.len();
    assert!(s > 5, "set search needs more than 5 blocks, got {s}");
    assert!(eps > 0.0, "set search needs a positive accuracy");
    let r = (12.0 * k as f64 * (s as f64).ln()).ceil() as u64;
    let params = EstimatorParams::new(eps, 1.0 / (20.0 * r as f64))
        .expect("derived estimator parameters are in range");
    // Probability of joining a union. The nominal 1/k keeps *everything* in
    // every union when k = 1, which can never isolate a block, so the
    // degenerate case is pinned to 1/2.
    let include = 1.0 / k.max(2) as f64;

    // Draw every round's union and estimator seed before the first query:
    // the queries are a function of this plan alone, never of answers.
    struct RoundPlan {
        union: Vec<usize>,
        estimator_seed: u64,
    }
    let plans: Vec<RoundPlan> = (0..r)
        .map(|_| RoundPlan {
            union: (0..s).filter(|_| rng.random_bool(include)).collect(),
            estimator_seed: rng.random(),
        })
        .collect();

    let mut surviving = vec![true; s];
    let mut scratch = PointMatrix::with_capacity(oracle.n(), 2 * params.rounds() as usize);
    for plan in &plans {
        let vars: Vec<usize> = plan
            .union
            .iter()
            .flat_map(|&id| p.block(id).iter().copied())
            .collect();
        let j = VarSet::new(vars).expect("partition blocks are disjoint");
        let mut est_rng = ChaCha8Rng::seed_from_u64(plan.estimator_seed);
        let estimate = match measure {
            Measure::Influence => {
                estimate_influence_into(oracle, &j, &params, &mut est_rng, &mut scratch)
            }
            Measure::Symmetric => {
                estimate_symmetric_influence_into(oracle, &j, &params, &mut est_rng, &mut scratch)
            }
        };
        if estimate <= 3.0 * eps {
            for &id in &plan.union {
                surviving[id] = false;
            }
        }
    }
    (0..s).filter(|&id| surviving[id]).collect()
}

/// Identify the partition blocks carrying influential variables.
///
/// Runs `ceil(12 k ln s)` rounds; each round draws a random union of blocks,
/// estimates its influence to accuracy `eps` with confidence `1 - 1/(20r)`,
/// and discards the whole union when the estimate is at most `3 * eps`.
/// Under the usual conditions — a partition separating the influential
/// variables, each with influence at least `6 * eps` — the survivors are
/// exactly the `k` carrying blocks with probability at least 9/10.
pub fn find_influencing_sets(
    oracle: &Oracle,
    p: &Partition,
    k: usize,
    eps: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    run_set_search(oracle, p, k, eps, rng, Measure::Influence)
}

/// As [`find_influencing_sets`], but surviving blocks are those whose unions
/// keep *symmetric* influence above the threshold — the asymmetric blocks of
/// a partially symmetric target.
pub fn find_asymmetric_sets(
    oracle: &Oracle,
    p: &Partition,
    k: usize,
    eps: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    run_set_search(oracle, p, k, eps, rng, Measure::Symmetric)
}

/// `None` when the returned blocks can proceed to scoring, or the reason to
/// answer 0 instead.
fn validate_returned(p: &Partition, returned: &[usize], k: usize) -> Option<AbortReason> {
    if returned.len() != k {
        return Some(AbortReason::WrongBlockCount);
    }
    if returned.iter().any(|&id| Some(id) == p.workspace()) {
        return Some(AbortReason::WorkspaceReturned);
    }
    if returned.iter().any(|&id| p.block(id).is_empty()) {
        return Some(AbortReason::EmptyBlock);
    }
    None
}

fn aborted_trace(
    p: Partition,
    returned: Vec<usize>,
    queries: u64,
    why: AbortReason,
) -> CorrectionTrace {
    CorrectionTrace {
        partition: p,
        returned_blocks: returned,
        representatives: Vec::new(),
        perm_scores: Vec::new(),
        chosen_perm: None,
        queries,
        output: false,
        abort: Some(why),
    }
}

/// Split `[n]` into the variables `x` sets to 0 and to 1.
fn split_by_point(x: &BitVector) -> (VarSet, VarSet) {
    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    for i in 0..x.n() {
        if x.get(i) {
            ones.push(i);
        } else {
            zeros.push(i);
        }
    }
    (VarSet::new(zeros).unwrap(), VarSet::new(ones).unwrap())
}

/// First maximum wins: with candidates in lexicographic order, ties break
/// toward the lexicographically smallest permutation.
fn argmax_strict(scores: &[u64]) -> usize {
    let mut best = 0;
    for (i, &sc) in scores.iter().enumerate().skip(1) {
        if sc > scores[best] {
            best = i;
        }
    }
    best
}

/// Recover `f_sigma(x)` for a junta with the given core under an unknown
/// relabeling, from queries to the corrupted copy alone.
///
/// Returns the corrected bit and the full decision trace. The promise — the
/// oracle is `epsilon`-close to *some* relabeling of this core — is never
/// verified; on promise violations the output bit is simply untrustworthy
/// (and the trace usually shows an abort).
pub fn locally_correct_junta(
    core: &JuntaCore,
    oracle: &Oracle,
    x: &BitVector,
    profile: &ConstantsProfile,
    rng: &mut impl Rng,
) -> Result<(bool, CorrectionTrace)> {
    let k = core.k();
    let n = oracle.n();
    assert_eq!(
        x.n(),
        n,
        "correction point width {} != oracle width {n}",
        x.n()
    );
    profile.check_perm_budget(k)?;
    let start_queries = oracle.query_count();

    if k == 0 {
        // A 0-junta is a constant; nothing to locate.
        let bit = core.get(0);
        return Ok((
            bit,
            CorrectionTrace {
                partition: Partition::new(n, Vec::new(), None)?,
                returned_blocks: Vec::new(),
                representatives: Vec::new(),
                perm_scores: vec![0],
                chosen_perm: Some(Vec::new()),
                queries: 0,
                output: bit,
                abort: None,
            },
        ));
    }

    // Sides follow the bits of x so block-constant queries can agree with x.
    let s = profile.junta_side_parts(k);
    let (zeros, ones) = split_by_point(x);
    let p0 = random_partition(&zeros, n, s, rng)?;
    let p1 = random_partition(&ones, n, s, rng)?;
    let mut blocks = p0.blocks().to_vec();
    blocks.extend_from_slice(p1.blocks());
    let merged = Partition::new(n, blocks, None)?;

    let returned = find_influencing_sets(oracle, &merged, k, profile.set_finder_eps, rng);
    if let Some(why) = validate_returned(&merged, &returned, k) {
        let queries = oracle.query_count() - start_queries;
        return Ok((false, aborted_trace(merged, returned, queries, why)));
    }

    // One representative per surviving block; any member is as good as the
    // true variable for block-constant queries, so take the lowest index.
    let reps: Vec<usize> = returned.iter().map(|&id| merged.block(id)[0]).collect();

    // Score slot permutations against merged balanced samples. Samples only
    // matter through (their bits at the representatives, the oracle answer),
    // so bucket first and scan permutations over the 2^k buckets.
    let r = profile.perm_samples(k);
    let mut points = PointMatrix::with_capacity(n, r as usize);
    for _ in 0..r {
        let y = sample_merged(&p0, &p1, rng)?;
        points.push(&y);
    }
    let answers = oracle.batch_matrix(&points);
    let mut buckets = vec![[0u64; 2]; 1 << k];
    for (row, &g) in points.rows().zip(&answers) {
        buckets[gather_bits(row, &reps) as usize][usize::from(g)] += 1;
    }

    let perms: Vec<Vec<usize>> = (0..k).permutations(k).collect();
    let scores: Vec<u64> = perms
        .iter()
        .map(|perm| {
            (0..1usize << k)
                .map(|u| buckets[u][usize::from(core.get(permute_slots(u, perm) as u64))])
                .sum()
        })
        .collect();
    let best = argmax_strict(&scores);
    let chosen = perms[best].clone();

    let x_at_reps = gather_bits(x.words(), &reps) as usize;
    let bit = core.get(permute_slots(x_at_reps, &chosen) as u64);
    let queries = oracle.query_count() - start_queries;
    Ok((
        bit,
        CorrectionTrace {
            partition: merged,
            returned_blocks: returned,
            representatives: reps,
            perm_scores: scores,
            chosen_perm: Some(chosen),
            queries,
            output: bit,
            abort: None,
        },
    ))
}

/// Recover `f_sigma(x)` for a partially symmetric function with the given
/// core under an unknown relabeling.
///
/// Mirrors the junta corrector with three changes: a random workspace block
/// (each variable joins with probability `1/(2s+1)`) gives the weight-exact
/// sampler room to hit target weights; the set search estimates *symmetric*
/// influence; and scoring evaluates the core on (bits at representatives,
/// weight of the rest).
pub fn locally_correct_psf(
    core: &PsfCore,
    oracle: &Oracle,
    x: &BitVector,
    profile: &ConstantsProfile,
    rng: &mut impl Rng,
) -> Result<(bool, CorrectionTrace)> {
    let k = core.k();
    let n = oracle.n();
    assert_eq!(
        x.n(),
        n,
        "correction point width {} != oracle width {n}",
        x.n()
    );
    if core.m() != n - k {
        return Err(Error::InvalidParameter(format!(
            "core expects {} symmetric variables, oracle has {}",
            core.m(),
            n - k
        )));
    }
    profile.check_perm_budget(k)?;
    let start_queries = oracle.query_count();

    if k == 0 {
        // Fully symmetric: the value depends on |x| alone.
        let bit = core.get(0, x.weight() as usize);
        return Ok((
            bit,
            CorrectionTrace {
                partition: Partition::new(n, Vec::new(), None)?,
                returned_blocks: Vec::new(),
                representatives: Vec::new(),
                perm_scores: vec![0],
                chosen_perm: Some(Vec::new()),
                queries: 0,
                output: bit,
                abort: None,
            },
        ));
    }

    let s = profile.psf_side_parts(k);
    // Random workspace, then x-sides over what remains.
    let include = 1.0 / (2 * s + 1) as f64;
    let workspace: Vec<usize> = (0..n).filter(|_| rng.random_bool(include)).collect();
    let in_workspace: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in &workspace {
            v[i] = true;
        }
        v
    };
    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    for (i, &taken) in in_workspace.iter().enumerate() {
        if !taken {
            if x.get(i) {
                ones.push(i);
            } else {
                zeros.push(i);
            }
        }
    }
    let p0 = random_partition(&VarSet::new(zeros).unwrap(), n, s, rng)?;
    let p1 = random_partition(&VarSet::new(ones).unwrap(), n, s, rng)?;
    let mut blocks = p0.blocks().to_vec();
    blocks.extend_from_slice(p1.blocks());
    blocks.push(workspace);
    let ws_id = blocks.len() - 1;
    let p = Partition::new(n, blocks, Some(ws_id))?;

    let returned = find_asymmetric_sets(oracle, &p, k, profile.set_finder_eps, rng);
    if let Some(why) = validate_returned(&p, &returned, k) {
        let queries = oracle.query_count() - start_queries;
        return Ok((false, aborted_trace(p, returned, queries, why)));
    }
    let reps: Vec<usize> = returned.iter().map(|&id| p.block(id)[0]).collect();

    // Weight-exact constant-on-blocks samples; bucket by (bits at
    // representatives, weight off the representatives).
    let m = core.m();
    let r = profile.perm_samples(k);
    let sampler = WorkspaceSampler::new(&p)?;
    let mut points = PointMatrix::with_capacity(n, r as usize);
    for _ in 0..r {
        points.push(&sampler.draw(rng));
    }
    let answers = oracle.batch_matrix(&points);
    let mut buckets = vec![[0u64; 2]; (1 << k) * (m + 1)];
    for (row, &g) in points.rows().zip(&answers) {
        let u = gather_bits(row, &reps) as usize;
        let total: u32 = row.iter().map(|w| w.count_ones()).sum();
        let w_rest = total as usize - u.count_ones() as usize;
        buckets[u * (m + 1) + w_rest][usize::from(g)] += 1;
    }

    let perms: Vec<Vec<usize>> = (0..k).permutations(k).collect();
    let scores: Vec<u64> = perms
        .iter()
        .map(|perm| {
            let mut sc = 0u64;
            for u in 0..1usize << k {
                let v = permute_slots(u, perm) as u64;
                let row = &buckets[u * (m + 1)..(u + 1) * (m + 1)];
                for (w, pair) in row.iter().enumerate() {
                    sc += pair[usize::from(core.get(v, w))];
                }
            }
            sc
        })
        .collect();
    let best = argmax_strict(&scores);
    let chosen = perms[best].clone();

    let x_at_reps = gather_bits(x.words(), &reps) as usize;
    let x_rest = x.weight() as usize - x_at_reps.count_ones() as usize;
    let bit = core.get(permute_slots(x_at_reps, &chosen) as u64, x_rest);
    let queries = oracle.query_count() - start_queries;
    Ok((
        bit,
        CorrectionTrace {
            partition: p,
            returned_blocks: returned,
            representatives: reps,
            perm_scores: scores,
            chosen_perm: Some(chosen),
            queries,
            output: bit,
            abort: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{FunctionView, Isomorphism, TruthTable};
    use crate::oracle::{make_oracle, NoiseSpec};
    use rand_chacha::ChaCha8Rng;

    fn ci_profile(factor: u32) -> ConstantsProfile {
        ConstantsProfile::scaled(factor)
            .unwrap()
            .with_set_finder_eps(0.05)
            .unwrap()
    }

    #[test]
    fn paper_profile_constants_are_verbatim() {
        let p = ConstantsProfile::paper();
        assert_eq!(p.junta_side_parts(2), 1600);
        assert_eq!(p.junta_side_parts(4), 6400);
        assert_eq!(p.psf_side_parts(3), 900);
        assert_eq!(p.perm_samples(1), 0);
        assert_eq!(p.perm_samples(2), 5000);
        assert_eq!(p.perm_samples(3), 12500);
        assert_eq!(p.perm_samples(4), 20000);
        assert_eq!(p.perm_samples(8), 60000);
        assert_eq!(p.set_rounds(5, 50), 235); // ceil(60 ln 50)
        assert_eq!(p.set_finder_eps, 0.01);
        // Scaled(10) divides partition sizes and samples by 10.
        let s = ConstantsProfile::scaled(10).unwrap();
        assert_eq!(s.junta_side_parts(4), 640);
        assert_eq!(s.perm_samples(4), 2000);
        assert!(s.name.contains("scaled:10"));
    }

    #[test]
    fn returned_set_validation_covers_all_aborts() {
        let p =
            Partition::new(6, vec![vec![0], vec![1, 2], vec![], vec![3, 4, 5]], Some(3)).unwrap();
        assert_eq!(
            validate_returned(&p, &[0], 2),
            Some(AbortReason::WrongBlockCount)
        );
        assert_eq!(
            validate_returned(&p, &[0, 3], 2),
            Some(AbortReason::WorkspaceReturned)
        );
        assert_eq!(
            validate_returned(&p, &[0, 2], 2),
            Some(AbortReason::EmptyBlock)
        );
        assert_eq!(validate_returned(&p, &[0, 1], 2), None);
    }

    #[test]
    fn set_search_returns_nothing_on_a_constant_oracle() {
        // Every union estimates to influence 0 <= 3 eps, so each round wipes
        // its whole union; surviving anything would need a block to dodge
        // every one of the r unions.
        let f = FunctionView::table(TruthTable::zeros(10).unwrap());
        let o = make_oracle(&f, &Isomorphism::identity(10), &NoiseSpec::none())
            .unwrap()
            .strict();
        let mut rng = ChaCha8Rng::seed_from_u64(120);
        for _ in 0..20 {
            let p = random_partition(&VarSet::full(10), 10, 8, &mut rng).unwrap();
            let returned = find_influencing_sets(&o, &p, 2, 0.05, &mut rng);
            assert!(
                returned.is_empty(),
                "survivors on a constant function: {returned:?}"
            );
        }
    }

    #[test]
    fn set_search_query_accounting_is_exact() {
        let f = FunctionView::table(TruthTable::zeros(8).unwrap());
        let o = make_oracle(&f, &Isomorphism::identity(8), &NoiseSpec::none()).unwrap();
        let p = Partition::new(8, (0..8).map(|i| vec![i]).collect(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(121);
        find_influencing_sets(&o, &p, 3, 0.05, &mut rng);
        let r = (12.0 * 3.0 * 8f64.ln()).ceil() as u64; // 75
        assert_eq!(r, 75);
        let q = EstimatorParams::new(0.05, 1.0 / (20.0 * r as f64))
            .unwrap()
            .rounds();
        assert_eq!(o.query_count(), r * 2 * q);
    }

    #[test]
    fn junta_corrector_recovers_a_dictator_with_one_block() {
        // k = 1: the permutation stage is trivial and the answer is the
        // representative's bit passed through the core.
        let core = JuntaCore::new(TruthTable::from_fn(1, |u| u == 1).unwrap());
        let profile = ci_profile(100);
        let mut rng = ChaCha8Rng::seed_from_u64(122);
        let mut correct = 0;
        for trial in 0..20 {
            let sigma = Isomorphism::random(16, &mut rng);
            let f = FunctionView::junta(16, core.clone(), vec![0]).unwrap();
            let o = make_oracle(&f, &sigma, &NoiseSpec::none())
                .unwrap()
                .strict();
            let truth = f.apply_isomorphism(&sigma).unwrap();
            let x = BitVector::random(16, &mut rng);
            let (bit, trace) = locally_correct_junta(&core, &o, &x, &profile, &mut rng).unwrap();
            if trace.abort.is_none() {
                assert_eq!(trace.chosen_perm, Some(vec![0]), "trial {trial}");
                assert_eq!(trace.representatives.len(), 1);
            }
            if bit == truth.eval(&x) {
                correct += 1;
            }
        }
        assert!(correct >= 18, "dictator recovery failed: {correct}/20");
    }

    #[test]
    fn true_permutation_scores_every_sample_under_zero_noise() {
        // Asymmetric 2-slot core (x AND NOT y), identity relabeling, no
        // noise: samples are block-constant, so reading representatives
        // through the true slot order reproduces g on every sample.
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| u == 0b01).unwrap());
        let profile = ci_profile(20);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 8;
        let f = FunctionView::junta(n, core.clone(), vec![2, 5]).unwrap();
        let o = make_oracle(&f, &Isomorphism::identity(n), &NoiseSpec::none())
            .unwrap()
            .strict();
        let x = BitVector::from_index(n, 0b10110100);
        let (_, trace) = locally_correct_junta(&core, &o, &x, &profile, &mut rng).unwrap();
        assert!(trace.abort.is_none(), "abort: {:?}", trace.abort);
        // Work out which permutation is truth: slot j's true variable is
        // positions[j]; find the representative sharing its block.
        let true_perm: Vec<usize> = {
            let slot_block: Vec<usize> = [2usize, 5]
                .iter()
                .map(|&v| trace.partition.block_of(v).unwrap())
                .collect();
            // perm[j] = index into reps of slot j's block.
            let perm: Vec<usize> = slot_block
                .iter()
                .map(|b| trace.returned_blocks.iter().position(|id| id == b).unwrap())
                .collect();
            perm
        };
        // chosen[j] = which rep slot j reads; scores are in lexicographic
        // order over S_2 = [[0,1], [1,0]].
        let r = profile.perm_samples(2);
        let idx = if true_perm == vec![0, 1] { 0 } else { 1 };
        assert_eq!(
            trace.perm_scores[idx], r,
            "true permutation must match every sample"
        );
        assert_eq!(trace.chosen_perm.as_deref(), Some(true_perm.as_slice()));
    }

    #[test]
    fn junta_corrector_end_to_end_small_scale() {
        // 2-junta with distinguishable slots under random relabelings.
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| u == 0b01).unwrap());
        let profile = ci_profile(20);
        let mut rng = ChaCha8Rng::seed_from_u64(124);
        let n = 16;
        let mut correct = 0;
        for _ in 0..20 {
            let sigma = Isomorphism::random(n, &mut rng);
            let f = FunctionView::junta(n, core.clone(), vec![0, 1]).unwrap();
            let o = make_oracle(&f, &sigma, &NoiseSpec::none())
                .unwrap()
                .strict();
            let truth = f.apply_isomorphism(&sigma).unwrap();
            let x = BitVector::random(n, &mut rng);
            let (bit, _) = locally_correct_junta(&core, &o, &x, &profile, &mut rng).unwrap();
            if bit == truth.eval(&x) {
                correct += 1;
            }
        }
        assert!(correct >= 18, "junta correction: {correct}/20");
    }

    #[test]
    fn junta_corrector_aborts_to_zero_when_blocks_go_missing() {
        // A constant oracle starves the set search: no survivors, wrong
        // count, hard zero.
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| u == 0b11).unwrap());
        let f = FunctionView::table(TruthTable::zeros(12).unwrap());
        let o = make_oracle(&f, &Isomorphism::identity(12), &NoiseSpec::none())
            .unwrap()
            .strict();
        let profile = ci_profile(50);
        let mut rng = ChaCha8Rng::seed_from_u64(125);
        let x = BitVector::random(12, &mut rng);
        let (bit, trace) = locally_correct_junta(&core, &o, &x, &profile, &mut rng).unwrap();
        assert!(!bit);
        assert_eq!(trace.abort, Some(AbortReason::WrongBlockCount));
        assert!(trace.chosen_perm.is_none());
    }

    #[test]
    fn psf_corrector_handles_the_fully_symmetric_case_without_queries() {
        let m = 12;
        let core = PsfCore::from_fn(0, m, |_, w| w % 3 == 1).unwrap();
        let f = FunctionView::psf(m, core.clone(), vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(126);
        let sigma = Isomorphism::random(m, &mut rng);
        let o = make_oracle(&f, &sigma, &NoiseSpec::none())
            .unwrap()
            .strict();
        for _ in 0..50 {
            let x = BitVector::random(m, &mut rng);
            let (bit, trace) =
                locally_correct_psf(&core, &o, &x, &ConstantsProfile::paper(), &mut rng).unwrap();
            assert_eq!(
                bit,
                f.eval(&x),
                "weight-only value must survive any relabeling"
            );
            assert_eq!(trace.queries, 0);
        }
        assert_eq!(o.query_count(), 0);
    }

    #[test]
    fn psf_corrector_end_to_end_small_scale() {
        // Two asymmetric slots that behave differently (slot 0 always
        // matters, slot 1 only on odd outside-weight), so the slot order is
        // learnable.
        let n = 16;
        let m = n - 2;
        let core =
            PsfCore::from_fn(2, m, |u, w| (u & 1 == 1) ^ (u >> 1 == 1 && w % 2 == 1)).unwrap();
        let profile = ci_profile(20);
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        let mut correct = 0;
        for _ in 0..20 {
            let sigma = Isomorphism::random(n, &mut rng);
            let f = FunctionView::psf(n, core.clone(), vec![0, 1]).unwrap();
            let o = make_oracle(&f, &sigma, &NoiseSpec::none())
                .unwrap()
                .strict();
            let truth = f.apply_isomorphism(&sigma).unwrap();
            let x = BitVector::random(n, &mut rng);
            let (bit, _) = locally_correct_psf(&core, &o, &x, &profile, &mut rng).unwrap();
            if bit == truth.eval(&x) {
                correct += 1;
            }
        }
        assert!(correct >= 15, "psf correction: {correct}/20");
    }

    #[test]
    fn correction_traces_are_deterministic() {
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| u == 0b10).unwrap());
        let f = FunctionView::junta(12, core.clone(), vec![3, 7]).unwrap();
        let noise = NoiseSpec::procedural(0.01, 5);
        let profile = ci_profile(50);
        let run = || {
            let sigma = Isomorphism::identity(12);
            let o = make_oracle(&f, &sigma, &noise).unwrap().strict();
            let mut rng = ChaCha8Rng::seed_from_u64(128);
            let x = BitVector::from_index(12, 0b101010101010);
            let (_, trace) = locally_correct_junta(&core, &o, &x, &profile, &mut rng).unwrap();
            serde_json::to_string(&trace).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn arity_above_the_scan_budget_is_rejected() {
        let core = JuntaCore::new(TruthTable::zeros(9).unwrap());
        let f = FunctionView::table(TruthTable::zeros(12).unwrap());
        let o = make_oracle(&f, &Isomorphism::identity(12), &NoiseSpec::none()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(129);
        let err = locally_correct_junta(
            &core,
            &o,
            &BitVector::zeros(12),
            &ConstantsProfile::paper(),
            &mut rng,
        );
        assert!(matches!(
            err,
            Err(Error::PermutationBudget { k: 9, max: 8 })
        ));
    }
}
