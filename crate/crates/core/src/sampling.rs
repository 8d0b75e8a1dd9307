//! Random partitions and the structured query distributions built on them.
//!
//! The correctors never query uniform points directly; they query vectors
//! that are *constant on the blocks* of a random partition, so that a whole
//! block of variables moves as one unknown. Three samplers:
//!
//! * [`sample_balanced`] — over a partition with an even number of blocks
//!   `2t`, pick a uniform weight-`t` indicator over blocks and turn the
//!   chosen blocks fully on. Averaged over a fresh random partition, the
//!   output is exactly uniform on the cube.
//! * [`sample_merged`] — two balanced draws over complementary ground sets,
//!   one per side, OR-ed together.
//! * [`sample_workspace`] — the weight-controlled variant: draw a target
//!   Hamming weight `w ~ B(n, 1/2)`, then a uniform vector among those of
//!   weight exactly `w` that are constant on every non-workspace block, with
//!   the designated workspace block filled freely to make up the weight. If
//!   no valid vector of weight `w` exists, the all-zeros vector is returned.
//!
//! Uniform sampling at fixed weight needs exact subset counts: the number of
//! block-subsets with total size `t` is tabulated once per partition in a
//! [`WeightCountTable`] (arbitrary-precision — the counts reach `2^B` for
//! `B` nonempty blocks), and draws walk the table backwards to pick a block
//! subset uniformly. Floating-point weights would silently bias the sampler,
//! and the uniformity here is a tested deliverable, so everything is integer
//! arithmetic until the final bits.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::influence::VarSet;

/// Disjoint blocks of variable indices, optionally with one block designated
/// as the workspace. Blocks may be empty; the ground set is the union.
#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    workspace: Option<usize>,
}

impl Partition {
    /// Validate disjointness and ranges. Block element order is normalized
    /// to ascending.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>, workspace: Option<usize>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} outside 0..{n}")));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {i} in two blocks")));
                }
                seen[i] = true;
            }
        }
        if let Some(w) = workspace {
            if w >= blocks.len() {
                return Err(Error::InvalidPartition(format!(
                    "workspace id {w} but only {} blocks",
                    blocks.len()
                )));
            }
        }
        Ok(Partition {
            n,
            blocks,
            workspace,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> &[usize] {
        &self.blocks[id]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn workspace(&self) -> Option<usize> {
        self.workspace
    }

    /// Which block holds variable `i`, if any.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&i).is_ok())
    }

    /// Union of all blocks.
    pub fn ground(&self) -> VarSet {
        let mut v: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        v.sort_unstable();
        VarSet::new(v).expect("blocks are disjoint")
    }
}

/// Assign each ground element independently and uniformly to one of `parts`
/// blocks. Empty blocks are retained — downstream set-search treats them as
/// candidates and must cope.
pub fn random_partition(
    ground: &VarSet,
    n: usize,
    parts: usize,
    rng: &mut impl Rng,
) -> Result<Partition> {
    if parts == 0 {
        return Err(Error::InvalidParameter(
            "a partition needs at least one block".into(),
        ));
    }
    let mut blocks = vec![Vec::new(); parts];
    for &i in ground.indices() {
        blocks[rng.random_range(0..parts)].push(i);
    }
    Partition::new(n, blocks, None)
}

/// Balanced constant-on-blocks draw: exactly half of the `2t` blocks are
/// turned fully on, chosen uniformly. Variables outside the ground set stay 0.
pub fn sample_balanced(p: &Partition, rng: &mut impl Rng) -> Result<BitVector> {
    if p.workspace().is_some() {
        return Err(Error::InvalidPartition(
            "balanced draws take no workspace".into(),
        ));
    }
    if !p.len().is_multiple_of(2) || p.is_empty() {
        return Err(Error::InvalidPartition(format!(
            "balanced draws need an even block count, got {}",
            p.len()
        )));
    }
    let mut y = BitVector::zeros(p.n());
    sample_balanced_into(p, rng, &mut y);
    Ok(y)
}

/// As [`sample_balanced`], assuming preconditions hold, OR-ing into `y`.
pub(crate) fn sample_balanced_into(p: &Partition, rng: &mut impl Rng, y: &mut BitVector) {
    let s = p.len();
    for id in rand::seq::index::sample(rng, s, s / 2) {
        for &i in p.block(id) {
            y.set(i, true);
        }
    }
}

/// Merge of two independent balanced draws over complementary ground sets.
pub fn sample_merged(p0: &Partition, p1: &Partition, rng: &mut impl Rng) -> Result<BitVector> {
    if p0.n() != p1.n() {
        return Err(Error::DimensionMismatch {
            left: p0.n(),
            right: p1.n(),
        });
    }
    for p in [p0, p1] {
        if p.workspace().is_some() || p.len() % 2 != 0 || p.is_empty() {
            return Err(Error::InvalidPartition(
                "merged draws need workspace-free sides with even block counts".into(),
            ));
        }
    }
    let g0 = p0.ground();
    for &i in p1.ground().indices() {
        if g0.contains(i) {
            return Err(Error::InvalidPartition(format!(
                "ground sets overlap at {i}"
            )));
        }
    }
    let mut y = BitVector::zeros(p0.n());
    sample_balanced_into(p0, rng, &mut y);
    sample_balanced_into(p1, rng, &mut y);
    Ok(y)
}

/// Exact subset-size counts over the nonempty non-workspace blocks:
/// `counts[t]` is the number of block-subsets whose sizes sum to `t`.
#[derive(Clone, Debug)]
pub struct WeightCountTable {
    counts: Vec<BigUint>,
}

impl WeightCountTable {
    /// Tabulate for `p`'s non-workspace blocks (empty blocks contribute
    /// nothing and are skipped so each vector is counted once).
    pub fn for_partition(p: &Partition) -> Self {
        let sizes: Vec<usize> = p
            .blocks()
            .iter()
            .enumerate()
            .filter(|&(id, b)| Some(id) != p.workspace() && !b.is_empty())
            .map(|(_, b)| b.len())
            .collect();
        let total: usize = sizes.iter().sum();
        let mut counts = vec![BigUint::ZERO; total + 1];
        counts[0] = BigUint::from(1u32);
        let mut reach = 0usize;
        for &c in &sizes {
            // In-place knapsack, walking down so each block is used once.
            for t in (0..=reach).rev() {
                if !counts[t].is_zero() {
                    let add = counts[t].clone();
                    counts[t + c] += add;
                }
            }
            reach += c;
        }
        WeightCountTable { counts }
    }

    /// `counts[t]`, zero beyond the table.
    pub fn count(&self, t: usize) -> BigUint {
        self.counts.get(t).cloned().unwrap_or(BigUint::ZERO)
    }

    /// Largest achievable total size.
    pub fn max_total(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }
}

/// Exact number of weight-`w` vectors that are constant on every
/// non-workspace block (workspace bits free): `sum_t N(t) * C(|W|, w - t)`.
pub fn count_weighted(p: &Partition, w: usize) -> Result<BigUint> {
    let sampler = WorkspaceSampler::new(p)?;
    Ok(sampler.count_weighted(w))
}

/// Draw from the weight-controlled workspace distribution. Equivalent to
/// building a [`WorkspaceSampler`] for one draw; loops should build the
/// sampler once.
pub fn sample_workspace(p: &Partition, rng: &mut impl Rng) -> Result<BitVector> {
    Ok(WorkspaceSampler::new(p)?.draw(rng))
}

/// Reusable sampler for the workspace distribution over one fixed partition.
///
/// Construction runs the subset-count dynamic program once, keeping every
/// prefix layer so draws can backtrack through it: `prefix[i][t]` counts
/// subsets of the first `i` nonempty blocks with total size `t`, and the
/// inclusion probability of block `i` at residual weight `t` is
/// `prefix[i-1][t - c_i] / prefix[i][t]`.
pub struct WorkspaceSampler {
    n: usize,
    /// Nonempty non-workspace blocks, in partition order.
    blocks: Vec<Vec<usize>>,
    /// Workspace variable indices.
    wvars: Vec<usize>,
    /// prefix[i][t] for i in 0..=blocks.len().
    prefix: Vec<Vec<BigUint>>,
    /// C(|W|, j) for j in 0..=|W|.
    wbinom: Vec<BigUint>,
    weight_law: Binomial,
}

impl WorkspaceSampler {
    pub fn new(p: &Partition) -> Result<Self> {
        let Some(ws) = p.workspace() else {
            return Err(Error::InvalidPartition(
                "workspace draws need a designated workspace block".into(),
            ));
        };
        if p.len().is_multiple_of(2) {
            return Err(Error::InvalidPartition(format!(
                "workspace draws need an odd total block count, got {}",
                p.len()
            )));
        }
        let blocks: Vec<Vec<usize>> = p
            .blocks()
            .iter()
            .enumerate()
            .filter(|&(id, b)| id != ws && !b.is_empty())
            .map(|(_, b)| b.clone())
            .collect();
        let wvars = p.block(ws).to_vec();
        let mut prefix: Vec<Vec<BigUint>> = Vec::with_capacity(blocks.len() + 1);
        prefix.push(vec![BigUint::from(1u32)]);
        let mut reach = 0usize;
        for b in &blocks {
            let c = b.len();
            let prev = prefix.last().unwrap();
            let mut next = vec![BigUint::ZERO; reach + c + 1];
            for t in 0..=reach {
                if !prev[t].is_zero() {
                    next[t] += &prev[t];
                    next[t + c] += &prev[t];
                }
            }
            prefix.push(next);
            reach += c;
        }
        let wlen = wvars.len();
        let mut wbinom = vec![BigUint::from(1u32); wlen + 1];
        for j in 1..=wlen {
            wbinom[j] = &wbinom[j - 1] * (wlen - j + 1) / j;
        }
        let weight_law =
            Binomial::new(p.n() as u64, 0.5).expect("binomial parameters are fixed and valid");
        Ok(WorkspaceSampler {
            n: p.n(),
            blocks,
            wvars,
            prefix,
            wbinom,
            weight_law,
        })
    }

    fn table(&self) -> &[BigUint] {
        self.prefix.last().unwrap()
    }

    /// Exact count of valid vectors of total weight `w`.
    // The loop walks a two-sided weight split (t from blocks, w - t from
    // workspace bits); index form keeps that symmetry readable.
    #[allow(clippy::needless_range_loop)]
    pub fn count_weighted(&self, w: usize) -> BigUint {
        let table = self.table();
        let mut total = BigUint::ZERO;
        for t in 0..=self.max_block_total().min(w) {
            let need = w - t;
            if need <= self.wvars.len() {
                total += &table[t] * &self.wbinom[need];
            }
        }
        total
    }

    fn max_block_total(&self) -> usize {
        self.table().len() - 1
    }

    /// One draw: binomial weight, then a uniform valid vector of that weight,
    /// or all-zeros when the weight is unreachable.
    #[allow(clippy::needless_range_loop)]
    pub fn draw(&self, rng: &mut impl Rng) -> BitVector {
        let w = self.weight_law.sample(rng) as usize;
        let total = self.count_weighted(w);
        let mut y = BitVector::zeros(self.n);
        if total.is_zero() {
            return y;
        }
        // Split the weight: t from whole blocks, w - t from workspace bits,
        // t chosen with probability N(t) * C(|W|, w-t) / total.
        let table = self.table();
        let mut pick = uniform_below(rng, &total);
        let mut chosen_t = 0usize;
        for t in 0..=self.max_block_total().min(w) {
            let need = w - t;
            if need > self.wvars.len() {
                continue;
            }
            let term = &table[t] * &self.wbinom[need];
            if pick < term {
                chosen_t = t;
                break;
            }
            pick -= term;
        }
        // Uniform block-subset of total size chosen_t, by backtracking the
        // prefix layers from the last block to the first.
        let mut t = chosen_t;
        for i in (1..self.prefix.len()).rev() {
            let c = self.blocks[i - 1].len();
            let with = if t >= c {
                self.prefix[i - 1]
                    .get(t - c)
                    .cloned()
                    .unwrap_or(BigUint::ZERO)
            } else {
                BigUint::ZERO
            };
            let here = &self.prefix[i][t];
            debug_assert!(!here.is_zero());
            if !with.is_zero() && uniform_below(rng, here) < with {
                for &v in &self.blocks[i - 1] {
                    y.set(v, true);
                }
                t -= c;
            }
        }
        debug_assert_eq!(t, 0);
        // Uniform (w - chosen_t)-subset of the workspace.
        let need = w - chosen_t;
        for idx in rand::seq::index::sample(rng, self.wvars.len(), need) {
            y.set(self.wvars[idx], true);
        }
        y
    }
}

/// Uniform integer in `[0, bound)`. Single-limb bounds take the plain RNG
/// range; larger bounds use bit-rejection on `bound.bits()` random bits.
fn uniform_below(rng: &mut impl Rng, bound: &BigUint) -> BigUint {
    debug_assert!(!bound.is_zero());
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.random_range(0..b));
    }
    let bits = bound.bits();
    let limbs = bits.div_ceil(32) as usize;
    let top_mask: u32 = if bits.is_multiple_of(32) {
        u32::MAX
    } else {
        (1u32 << (bits % 32)) - 1
    };
    loop {
        let mut digits: Vec<u32> = (0..limbs).map(|_| rng.random()).collect();
        *digits.last_mut().unwrap() &= top_mask;
        let candidate = BigUint::new(digits);
        if &candidate < bound {
            return candidate;
        }
    }
}
