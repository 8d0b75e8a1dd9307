//! Influence and symmetric influence of variable sets.
//!
//! For a set `J` of variables, the *influence* `Inf_f(J)` is the probability
//! that re-randomizing the `J`-coordinates of a uniform point changes `f`:
//!
//! ```text
//! Inf_f(J) = Pr_{x,y}[ f(x) != f(x with J replaced by y|J) ]
//! ```
//!
//! The *symmetric influence* `SymInf_f(J)` replaces re-randomization with a
//! uniform permutation of the `J`-coordinates, so it measures how far `f` is
//! from being symmetric in `J`:
//!
//! ```text
//! SymInf_f(J) = Pr_{x,pi}[ f(x) != f(pi x) ],   pi uniform on S_J
//! ```
//!
//! Both have exact finite forms obtained by conditioning on the variables
//! outside `J`. With `c_z` the number of `J`-assignments mapped to 1 under
//! outside-assignment `z` (and `c_{z,w}` the count within the weight-`w`
//! layer, of size `L_w = C(|J|, w)`):
//!
//! ```text
//! Inf_f(J)    = 2^-(n+|J|)  *  sum_z 2 c_z (2^|J| - c_z)
//! SymInf_f(J) = (2^n |J|!)^-1  *  sum_z sum_w 2 c_{z,w} (L_w - c_{z,w}) w! (|J|-w)!
//! ```
//!
//! using that a uniform permutation maps a fixed weight-`w` point to each
//! weight-`w` point with probability `w!(|J|-w)!/|J|!`. The `*_fraction`
//! variants return these as integer numerator/denominator pairs so callers
//! can compare influences with zero rounding error; for `n <= 20` everything
//! fits comfortably in `u128`.
//!
//! The estimators answer the same questions through an oracle with
//! 2-queries-per-round Monte-Carlo: all `2q` points are generated up front
//! and answered as one batch, so they run unchanged against strict
//! (batch-only) oracles. `q = ceil(ln(2/eta) / (2 delta^2))` rounds put the
//! estimate within `delta` of truth with probability `1 - eta` (Hoeffding).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::{fill_random, words_for, PointMatrix};
use crate::boolfn::FunctionView;
use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Cap on the exhaustive closed-form paths.
pub const MAX_EXACT_INFLUENCE_VARS: usize = 20;

/// A set of variable indices, kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarSet {
    indices: Vec<usize>,
}

impl VarSet {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidVarSet("repeated index".into()));
        }
        Ok(VarSet { indices })
    }

    pub fn empty() -> Self {
        VarSet {
            indices: Vec::new(),
        }
    }

    pub fn singleton(i: usize) -> Self {
        VarSet { indices: vec![i] }
    }

    /// All of `0..n`.
    pub fn full(n: usize) -> Self {
        VarSet {
            indices: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut v = self.indices.clone();
        v.extend_from_slice(&other.indices);
        v.sort_unstable();
        v.dedup();
        VarSet { indices: v }
    }

    /// Indices of `0..n` not in the set. All members must lie below `n`.
    pub fn complement(&self, n: usize) -> Result<VarSet> {
        self.check_within(n)?;
        let mut out = Vec::with_capacity(n - self.len());
        let mut it = self.indices.iter().peekable();
        for i in 0..n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        Ok(VarSet { indices: out })
    }

    /// Word mask with exactly the member bits set, for an `n`-variable point.
    pub fn mask_words(&self, n: usize) -> Result<Vec<u64>> {
        self.check_within(n)?;
        let mut mask = vec![0u64; words_for(n)];
        for &i in &self.indices {
            mask[i >> 6] |= 1u64 << (i & 63);
        }
        Ok(mask)
    }

    fn check_within(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max >= n => {
                Err(Error::InvalidVarSet(format!("index {max} outside 0..{n}")))
            }
            _ => Ok(()),
        }
    }
}

/// Accuracy/confidence pair steering estimator round counts.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct EstimatorParams {
    /// Additive accuracy target.
    pub delta: f64,
    /// Failure probability budget.
    pub eta: f64,
}

impl EstimatorParams {
    pub fn new(delta: f64, eta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0 && eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "estimator parameters delta = {delta}, eta = {eta} must lie in (0, 1)"
            )));
        }
        Ok(EstimatorParams { delta, eta })
    }

    /// Rounds needed for |estimate - truth| <= delta with probability
    /// 1 - eta: `ceil(ln(2/eta) / (2 delta^2))`. Each round costs 2 queries.
    pub fn rounds(&self) -> u64 {
        ((2.0 / self.eta).ln() / (2.0 * self.delta * self.delta)).ceil() as u64
    }
}

/// Build `table[u] = u` scattered onto the given bit positions (single-word
/// points only). Entry `u & (u-1)` differs by one bit, so the table fills in
/// O(1) per entry.
fn scatter_table(positions: &[usize]) -> Vec<u64> {
    let bits: Vec<u64> = positions.iter().map(|&p| 1u64 << p).collect();
    let mut table = vec![0u64; 1usize << positions.len()];
    for u in 1..table.len() {
        table[u] = table[u & (u - 1)] | bits[u.trailing_zeros() as usize];
    }
    table
}

fn exact_preconditions(f: &FunctionView, j: &VarSet) -> Result<()> {
    let n = f.n();
    if n > MAX_EXACT_INFLUENCE_VARS {
        return Err(Error::ExactPathTooLarge {
            n,
            max: MAX_EXACT_INFLUENCE_VARS,
        });
    }
    if let Some(&max) = j.indices().last() {
        if max >= n {
            return Err(Error::InvalidVarSet(format!("index {max} outside 0..{n}")));
        }
    }
    Ok(())
}

/// `Inf_f(J)` as an exact fraction `numerator / 2^log2_denominator`.
pub fn influence_exact_fraction(f: &FunctionView, j: &VarSet) -> Result<(u128, u32)> {
    exact_preconditions(f, j)?;
    let n = f.n();
    let inside = scatter_table(j.indices());
    let outside = scatter_table(j.complement(n)?.indices());
    let l = inside.len() as u64;
    let mut num: u128 = 0;
    for &z in &outside {
        let mut c = 0u64;
        for &u in &inside {
            if f.eval_words(&[z | u]) {
                c += 1;
            }
        }
        num += 2 * c as u128 * (l - c) as u128;
    }
    Ok((num, (n + j.len()) as u32))
}

/// `Inf_f(J)`, exact. The numerator is below `2^53` for `n <= 20`, so the
/// returned `f64` is the true value, not an approximation.
pub fn influence_exact(f: &FunctionView, j: &VarSet) -> Result<f64> {
    let (num, log2_den) = influence_exact_fraction(f, j)?;
    Ok(num as f64 / 2f64.powi(log2_den as i32))
}

/// `SymInf_f(J)` as an exact fraction `(numerator, denominator)` with
/// denominator `2^n * |J|!`.
pub fn symmetric_influence_exact_fraction(f: &FunctionView, j: &VarSet) -> Result<(u128, u128)> {
    exact_preconditions(f, j)?;
    let n = f.n();
    let jl = j.len();
    let inside = scatter_table(j.indices());
    let outside = scatter_table(j.complement(n)?.indices());
    let fact: Vec<u128> = {
        let mut f = vec![1u128; jl + 1];
        for i in 1..=jl {
            f[i] = f[i - 1] * i as u128;
        }
        f
    };
    // Layer sizes L_w = C(|J|, w) and the per-pair permutation count
    // w!(|J|-w)!.
    let layer: Vec<u64> = {
        let mut l = vec![0u64; jl + 1];
        l[0] = 1;
        for w in 1..=jl {
            l[w] = l[w - 1] * (jl - w + 1) as u64 / w as u64;
        }
        l
    };
    let pair_perms: Vec<u128> = (0..=jl).map(|w| fact[w] * fact[jl - w]).collect();
    let mut counts = vec![0u64; jl + 1];
    let mut num: u128 = 0;
    for &z in &outside {
        counts.fill(0);
        for (u_bits, &u) in inside.iter().enumerate() {
            if f.eval_words(&[z | u]) {
                counts[u_bits.count_ones() as usize] += 1;
            }
        }
        for w in 0..=jl {
            let c = counts[w] as u128;
            num += 2 * c * (layer[w] as u128 - c) * pair_perms[w];
        }
    }
    Ok((num, (1u128 << n) * fact[jl]))
}

/// `SymInf_f(J)` as a correctly-converted `f64`. Exact comparisons should go
/// through [`symmetric_influence_exact_fraction`].
pub fn symmetric_influence_exact(f: &FunctionView, j: &VarSet) -> Result<f64> {
    let (num, den) = symmetric_influence_exact_fraction(f, j)?;
    Ok(num as f64 / den as f64)
}

/// Splice `y`'s bits into `x` at the masked positions.
#[inline]
fn splice(x: &mut [u64], y: &[u64], mask: &[u64]) {
    for i in 0..x.len() {
        x[i] = (x[i] & !mask[i]) | (y[i] & mask[i]);
    }
}

pub(crate) fn estimate_influence_into(
    oracle: &Oracle,
    j: &VarSet,
    params: &EstimatorParams,
    rng: &mut impl Rng,
    scratch: &mut PointMatrix,
) -> f64 {
    let n = oracle.n();
    let mask = j
        .mask_words(n)
        .expect("variable set outside the oracle's cube");
    let q = params.rounds() as usize;
    let wpp = words_for(n);
    let mut x = vec![0u64; wpp];
    let mut y = vec![0u64; wpp];
    scratch.clear();
    for _ in 0..q {
        fill_random(&mut x, n, rng);
        scratch.push_words(&x);
        fill_random(&mut y, n, rng);
        splice(&mut x, &y, &mask);
        scratch.push_words(&x);
    }
    let answers = oracle.batch_matrix(scratch);
    let disagree = answers
        .chunks_exact(2)
        .filter(|pair| pair[0] != pair[1])
        .count();
    disagree as f64 / q as f64
}

/// Monte-Carlo estimate of `Inf_g(J)` for the oracle's function `g`.
///
/// Draws `q` independent pairs `(x, x with J re-randomized)`, submits all
/// `2q` points as one batch, and returns the disagreement ratio.
pub fn estimate_influence(
    oracle: &Oracle,
    j: &VarSet,
    params: &EstimatorParams,
    rng: &mut impl Rng,
) -> f64 {
    let mut scratch = PointMatrix::with_capacity(oracle.n(), 2 * params.rounds() as usize);
    estimate_influence_into(oracle, j, params, rng, &mut scratch)
}

pub(crate) fn estimate_symmetric_influence_into(
    oracle: &Oracle,
    j: &VarSet,
    params: &EstimatorParams,
    rng: &mut impl Rng,
    scratch: &mut PointMatrix,
) -> f64 {
    let n = oracle.n();
    if let Some(&max) = j.indices().last() {
        assert!(max < n, "variable set outside the oracle's cube");
    }
    let q = params.rounds() as usize;
    let wpp = words_for(n);
    let mut x = vec![0u64; wpp];
    let mut y = vec![0u64; wpp];
    let mut shuffled = j.indices().to_vec();
    scratch.clear();
    for _ in 0..q {
        fill_random(&mut x, n, rng);
        scratch.push_words(&x);
        // pi x: permute the J-coordinates by a fresh uniform permutation.
        y.copy_from_slice(&x);
        shuffled.copy_from_slice(j.indices());
        shuffled.shuffle(rng);
        for (slot, &src) in shuffled.iter().enumerate() {
            let bit = (x[src >> 6] >> (src & 63)) & 1;
            let dst = j.indices()[slot];
            y[dst >> 6] = (y[dst >> 6] & !(1u64 << (dst & 63))) | (bit << (dst & 63));
        }
        scratch.push_words(&y);
    }
    let answers = oracle.batch_matrix(scratch);
    let disagree = answers
        .chunks_exact(2)
        .filter(|pair| pair[0] != pair[1])
        .count();
    disagree as f64 / q as f64
}

/// Monte-Carlo estimate of `SymInf_g(J)`: pairs `(x, pi x)` with `pi` a fresh
/// uniform permutation of the `J`-coordinates each round, answered as one
/// batch.
pub fn estimate_symmetric_influence(
    oracle: &Oracle,
    j: &VarSet,
    params: &EstimatorParams,
    rng: &mut impl Rng,
) -> f64 {
    let mut scratch = PointMatrix::with_capacity(oracle.n(), 2 * params.rounds() as usize);
    estimate_symmetric_influence_into(oracle, j, params, rng, &mut scratch)
}
