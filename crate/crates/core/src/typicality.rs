//! Promise checks that make correction possible, and the family showing
//! they are not optional.
//!
//! The correctors' guarantees hold for *typical* targets: every
//! distinguished variable must carry real influence (so the set search can
//! see its block), and the target must sit far from its own nontrivial
//! relabelings (so only one slot order can win the scoring stage). Random
//! cores have both properties with probability `1 - 2^-Omega(k)`; this
//! module measures them exactly and renders strict pass/fail verdicts
//! against the 0.1 threshold.
//!
//! None of this is bookkeeping. [`make_hard_junta`] builds a k-junta that is
//! `2^-k`-close to the all-zeros function, so for noise rates above `2^-k`
//! the corrupted copy can be *identically zero* no matter which relabeling
//! was applied — the queries carry no information about `sigma`, and no
//! corrector, ours or any other, can recover it. Atypical functions are a
//! real wall, not a proof convenience.

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{permute_slots, words_for};
use crate::boolfn::{
    distance, DistanceMode, FunctionView, Isomorphism, JuntaCore, PsfCore, TruthTable,
};
use crate::error::{Error, Result};
use crate::influence::{influence_exact, symmetric_influence_exact, VarSet};

/// Every typicality statistic is compared against this, strictly.
pub const TYPICALITY_THRESHOLD: f64 = 0.1;

/// Which structural property a verdict measured.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypicalityCheck {
    /// Minimum single-variable influence of a junta core.
    MinInfluence,
    /// Minimum distance from the core to a nontrivial slot relabeling.
    FarFromIsomorphisms,
    /// Minimum symmetric influence of an (asymmetric, symmetric) pair.
    PairSymmetricInfluence,
    /// Minimum distance from the function to a nontrivial permutation of
    /// its asymmetric slots.
    FarFromCorePermutations,
}

/// Outcome of one typicality check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TypicalityVerdict {
    pub check: TypicalityCheck,
    /// The measured minimum, or `None` when the check had nothing to scan
    /// (no asymmetric variables, or no nontrivial permutation exists).
    pub statistic: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

impl TypicalityVerdict {
    fn measured(check: TypicalityCheck, statistic: f64) -> Self {
        TypicalityVerdict {
            check,
            statistic: Some(statistic),
            threshold: TYPICALITY_THRESHOLD,
            pass: statistic > TYPICALITY_THRESHOLD,
        }
    }

    /// Nothing to scan: the property holds vacuously.
    fn vacuous(check: TypicalityCheck) -> Self {
        TypicalityVerdict {
            check,
            statistic: None,
            threshold: TYPICALITY_THRESHOLD,
            pass: true,
        }
    }
}

/// Check that every slot of a junta core has influence above 0.1.
///
/// Uses the exact closed form on the core itself, so the verdict is not
/// statistical. A slot with influence at or below the threshold is one the
/// set search cannot reliably keep at the working noise rates.
///
/// Panics when `k > 20` (the exhaustive-influence cap).
pub fn check_core_min_influence(core: &JuntaCore) -> TypicalityVerdict {
    let k = core.k();
    if k == 0 {
        return TypicalityVerdict::vacuous(TypicalityCheck::MinInfluence);
    }
    let view = FunctionView::table(core.table().clone());
    let min = (0..k)
        .map(|i| {
            influence_exact(&view, &VarSet::singleton(i))
                .expect("exhaustive influence requires k <= 20")
        })
        .fold(f64::INFINITY, f64::min);
    TypicalityVerdict::measured(TypicalityCheck::MinInfluence, min)
}

/// Check that the core is 0.1-far from every nontrivial relabeling of its
/// own slots. Scans all `k! - 1` nontrivial permutations with exact
/// distances, so it requires `k <= 8`.
pub fn check_core_far_from_isomorphisms(core: &JuntaCore) -> Result<TypicalityVerdict> {
    let k = core.k();
    if k > 8 {
        return Err(Error::PermutationBudget { k, max: 8 });
    }
    if k <= 1 {
        return Ok(TypicalityVerdict::vacuous(
            TypicalityCheck::FarFromIsomorphisms,
        ));
    }
    let base = FunctionView::table(core.table().clone());
    let mut min = f64::INFINITY;
    for perm in (0..k).permutations(k) {
        if perm.iter().enumerate().all(|(j, &pj)| j == pj) {
            continue;
        }
        let relabeled = base.apply_isomorphism(&Isomorphism::new(perm)?)?;
        min = min.min(distance(&base, &relabeled, DistanceMode::Exact)?);
    }
    Ok(TypicalityVerdict::measured(
        TypicalityCheck::FarFromIsomorphisms,
        min,
    ))
}

/// Check that each asymmetric variable, paired with a symmetric one, has
/// symmetric influence above 0.1 in the embedded function.
///
/// One symmetric partner suffices: the function is invariant under its
/// symmetric variables, so every choice of partner gives the same value.
/// Exact when `n <= 20`; otherwise a seeded Monte-Carlo estimate from
/// `sample_budget` swap pairs per asymmetric variable (a uniform
/// permutation of a pair is the identity half the time, so the swap
/// disagreement rate is divided by two).
pub fn check_psf_pair_syminf(
    core: &PsfCore,
    positions: &[usize],
    n: usize,
    sample_budget: u64,
    rng: &mut impl Rng,
) -> TypicalityVerdict {
    let k = core.k();
    assert_eq!(positions.len(), k, "need one position per asymmetric slot");
    if k == 0 || core.m() == 0 {
        return TypicalityVerdict::vacuous(TypicalityCheck::PairSymmetricInfluence);
    }
    let view = FunctionView::psf(n, core.clone(), positions.to_vec())
        .expect("core dimensions must match the embedding");
    // Lowest variable index not hosting an asymmetric slot.
    let partner = (0..n)
        .find(|i| !positions.contains(i))
        .expect("m >= 1 guarantees a symmetric variable");
    let min = positions
        .iter()
        .map(|&p| {
            if n <= 20 {
                let pair = VarSet::new(vec![p, partner]).expect("slot positions are distinct");
                symmetric_influence_exact(&view, &pair)
                    .expect("exhaustive symmetric influence requires n <= 20")
            } else {
                let mut disagree = 0u64;
                let mut x = vec![0u64; words_for(n)];
                let mut y = vec![0u64; words_for(n)];
                for _ in 0..sample_budget {
                    crate::bits::fill_random(&mut x, n, rng);
                    y.copy_from_slice(&x);
                    let a = (x[p >> 6] >> (p & 63)) & 1;
                    let b = (x[partner >> 6] >> (partner & 63)) & 1;
                    y[p >> 6] = (y[p >> 6] & !(1u64 << (p & 63))) | (b << (p & 63));
                    y[partner >> 6] =
                        (y[partner >> 6] & !(1u64 << (partner & 63))) | (a << (partner & 63));
                    if view.eval_words(&x) != view.eval_words(&y) {
                        disagree += 1;
                    }
                }
                disagree as f64 / sample_budget as f64 / 2.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    TypicalityVerdict::measured(TypicalityCheck::PairSymmetricInfluence, min)
}

/// Check that the embedded function is 0.1-far from every nontrivial
/// permutation of its asymmetric slots.
///
/// The two functions agree outside the asymmetric coordinates, so the
/// distance decomposes over (slot pattern, symmetric weight) cells:
/// `sum over (u, w) of [core(u, w) != core(perm u, w)] * C(m, w) / 2^n`.
/// The cell counts are exact integers, which keeps the scan exact at any
/// `n` — no `2^n` enumeration is involved. Requires `k <= 8` for the `k!`
/// scan.
pub fn check_psf_far_from_core_perms(core: &PsfCore, n: usize) -> Result<TypicalityVerdict> {
    let k = core.k();
    let m = core.m();
    if k > 8 {
        return Err(Error::PermutationBudget { k, max: 8 });
    }
    if m != n.checked_sub(k).ok_or_else(|| {
        Error::InvalidParameter(format!("n = {n} cannot host {k} asymmetric slots"))
    })? {
        return Err(Error::InvalidParameter(format!(
            "core with {m} symmetric variables does not embed in n = {n} with k = {k}"
        )));
    }
    if k <= 1 {
        return Ok(TypicalityVerdict::vacuous(
            TypicalityCheck::FarFromCorePermutations,
        ));
    }

    // C(m, w) for w = 0..=m.
    let mut binom = vec![BigUint::from(1u32)];
    for w in 0..m {
        let next = (&binom[w] * (m - w)) / (w + 1);
        binom.push(next);
    }

    let mut min = f64::INFINITY;
    for perm in (0..k).permutations(k) {
        if perm.iter().enumerate().all(|(j, &pj)| j == pj) {
            continue;
        }
        let mut diff = BigUint::from(0u32);
        for u in 0..1usize << k {
            let v = permute_slots(u, &perm);
            if v == u {
                continue;
            }
            for (w, count) in binom.iter().enumerate() {
                if core.get(u as u64, w) != core.get(v as u64, w) {
                    diff += count;
                }
            }
        }
        // diff / 2^n, computed as (diff scaled to 64 fractional bits) / 2^64
        // so the conversion to f64 never overflows.
        let scaled = if n <= 64 {
            &diff << (64 - n)
        } else {
            &diff >> (n - 64)
        };
        let d = scaled.to_f64().expect("scaled ratio fits in f64 range") / 2f64.powi(64);
        min = min.min(d);
    }
    Ok(TypicalityVerdict::measured(
        TypicalityCheck::FarFromCorePermutations,
        min,
    ))
}

/// The junta family no corrector can handle: 1 exactly when the first
/// distinguished variable is 1 and the remaining `k - 1` are 0.
///
/// Its ones fraction is exactly `2^-k`, so for noise rates `epsilon >=
/// 2^-k` the all-zeros function is a legal corruption of *every* relabeling
/// of it at once — query answers then carry no information about which
/// relabeling was applied, and correction at the stated noise rates is
/// impossible, not merely hard.
pub fn make_hard_junta(k: usize, n: usize) -> Result<FunctionView> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "the hard family needs k >= 1".into(),
        ));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!(
            "n = {n} cannot host a {k}-junta"
        )));
    }
    // Slot pattern (1, 0, .., 0) is index 1 in the core table.
    let mut table = TruthTable::zeros(k)?;
    table.set(1, true);
    FunctionView::junta(n, JuntaCore::new(table), (0..k).collect())
}
