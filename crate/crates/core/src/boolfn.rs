//! Boolean function representations.
//!
//! Three shapes cover everything the correctors touch:
//!
//! * [`TruthTable`] — an explicit table over up to [`MAX_TABLE_VARS`]
//!   variables, bit-packed with the point's integer index (variable 0 =
//!   least-significant bit) selecting the table bit.
//! * [`JuntaCore`] + positions — a function of `n` variables that only reads
//!   `k` of them: `f(x) = core(x_{p_0}, …, x_{p_{k-1}})` where slot `j` of the
//!   core reads ambient variable `p_j`.
//! * [`PsfCore`] + positions — partially symmetric: the core reads the `k`
//!   distinguished variables exactly and everything else only through its
//!   Hamming weight, `f(x) = core(u, w)` with `u = x` restricted to the
//!   positions and `w = |x| - |u|`.
//!
//! [`FunctionView`] wraps any of the three behind one evaluation interface so
//! oracles and distance routines don't care which representation they got.

use rand::Rng;

use crate::bits::{get_bit, words_for, BitVector};
use crate::error::{Error, Result};

/// Cap on explicit truth-table size (2^24 bits = 2 MiB per table).
pub const MAX_TABLE_VARS: usize = 24;

/// Explicit truth table over `n <= MAX_TABLE_VARS` variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruthTable {
    n: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    /// All-zeros table.
    pub fn zeros(n: usize) -> Result<Self> {
        if n > MAX_TABLE_VARS {
            return Err(Error::TableTooLarge {
                n,
                max: MAX_TABLE_VARS,
            });
        }
        Ok(TruthTable {
            n,
            bits: vec![0; words_for(1 << n)],
        })
    }

    /// Tabulate `f` over all `2^n` points, where the argument is the point's
    /// index (variable 0 = bit 0 of the index).
    pub fn from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        let mut t = TruthTable::zeros(n)?;
        for idx in 0..(1u64 << n) {
            if f(idx) {
                t.set(idx, true);
            }
        }
        Ok(t)
    }

    /// Uniformly random table.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut t = TruthTable::zeros(n)?;
        let total = 1usize << n;
        for w in t.bits.iter_mut() {
            *w = rng.random();
        }
        if !total.is_multiple_of(64) {
            if let Some(last) = t.bits.last_mut() {
                *last &= (1u64 << (total % 64)) - 1;
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of entries, `2^n`.
    pub fn len(&self) -> u64 {
        1u64 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, index: u64) -> bool {
        debug_assert!(index < self.len());
        get_bit(&self.bits, index as usize)
    }

    pub fn set(&mut self, index: u64, value: bool) {
        assert!(
            index < self.len(),
            "index {index} out of range for n = {}",
            self.n
        );
        crate::bits::set_bit(&mut self.bits, index as usize, value);
    }

    /// Number of points mapped to 1.
    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Hamming distance between two tables of equal width, in points.
    pub fn diff_count(&self, other: &TruthTable) -> Result<u64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum())
    }

    /// Hex encoding of the table bits, entry `i` at byte `i/8`, bit `i%8`.
    pub fn to_hex(&self) -> String {
        let nbytes = (1usize << self.n).div_ceil(8);
        let mut bytes = Vec::with_capacity(nbytes);
        for w in &self.bits {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        bytes.truncate(nbytes);
        hex::encode(bytes)
    }

    /// Inverse of [`to_hex`](Self::to_hex).
    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        let mut t = TruthTable::zeros(n)?;
        let bytes = hex::decode(s).map_err(|e| Error::Descriptor(format!("bad hex: {e}")))?;
        let expect = (1usize << n).div_ceil(8);
        if bytes.len() != expect {
            return Err(Error::Descriptor(format!(
                "table hex carries {} bytes, expected {expect} for n = {n}",
                bytes.len()
            )));
        }
        for (j, &b) in bytes.iter().enumerate() {
            t.bits[j / 8] |= (b as u64) << (8 * (j % 8));
        }
        if !(1usize << n).is_multiple_of(64) {
            let used = (1usize << n) % 64;
            if let Some(&last) = t.bits.last() {
                if last >> used != 0 {
                    return Err(Error::Descriptor(
                        "table hex sets bits beyond 2^n entries".into(),
                    ));
                }
            }
        }
        Ok(t)
    }
}

/// The `k`-variable core of a junta, an ordinary truth table over the slots.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JuntaCore(TruthTable);

impl JuntaCore {
    pub fn new(table: TruthTable) -> Self {
        JuntaCore(table)
    }

    pub fn random(k: usize, rng: &mut impl Rng) -> Result<Self> {
        Ok(JuntaCore(TruthTable::random(k, rng)?))
    }

    /// Arity of the core.
    pub fn k(&self) -> usize {
        self.0.n()
    }

    pub fn table(&self) -> &TruthTable {
        &self.0
    }

    #[inline]
    pub fn get(&self, slots: u64) -> bool {
        self.0.get(slots)
    }
}

/// Core of a partially symmetric function: a table indexed by the assignment
/// `u` of the `k` distinguished slots and the Hamming weight `w` of the
/// remaining `m` variables.
///
/// Entry `(u, w)` lives at bit `(w << k) | u`, so the table holds
/// `(m + 1) * 2^k` bits grouped weight-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PsfCore {
    k: usize,
    m: usize,
    bits: Vec<u64>,
}

impl PsfCore {
    pub fn zeros(k: usize, m: usize) -> Result<Self> {
        if k > MAX_TABLE_VARS {
            return Err(Error::TableTooLarge {
                n: k,
                max: MAX_TABLE_VARS,
            });
        }
        let entries = (m as u64 + 1) << k;
        if entries > 1 << 30 {
            return Err(Error::InvalidParameter(format!(
                "symmetric core with {entries} entries is too large"
            )));
        }
        Ok(PsfCore {
            k,
            m,
            bits: vec![0; words_for(entries as usize)],
        })
    }

    /// Tabulate from a predicate on `(u, w)`.
    pub fn from_fn(k: usize, m: usize, f: impl Fn(u64, usize) -> bool) -> Result<Self> {
        let mut c = PsfCore::zeros(k, m)?;
        for w in 0..=m {
            for u in 0..(1u64 << k) {
                if f(u, w) {
                    c.set(u, w, true);
                }
            }
        }
        Ok(c)
    }

    pub fn random(k: usize, m: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut c = PsfCore::zeros(k, m)?;
        let entries = (m + 1) << k;
        for w in c.bits.iter_mut() {
            *w = rng.random();
        }
        if !entries.is_multiple_of(64) {
            if let Some(last) = c.bits.last_mut() {
                *last &= (1u64 << (entries % 64)) - 1;
            }
        }
        Ok(c)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of symmetric variables.
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, u: u64, w: usize) -> bool {
        debug_assert!(u >> self.k == 0 && w <= self.m);
        get_bit(&self.bits, ((w as u64) << self.k | u) as usize)
    }

    pub fn set(&mut self, u: u64, w: usize, value: bool) {
        assert!(
            u >> self.k == 0,
            "slot assignment {u} out of range for k = {}",
            self.k
        );
        assert!(w <= self.m, "weight {w} out of range for m = {}", self.m);
        crate::bits::set_bit(&mut self.bits, ((w as u64) << self.k | u) as usize, value);
    }

    pub fn to_hex(&self) -> String {
        let entries = (self.m + 1) << self.k;
        let nbytes = entries.div_ceil(8);
        let mut bytes = Vec::with_capacity(nbytes);
        for w in &self.bits {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        bytes.truncate(nbytes);
        hex::encode(bytes)
    }

    pub fn from_hex(k: usize, m: usize, s: &str) -> Result<Self> {
        let mut c = PsfCore::zeros(k, m)?;
        let entries = (m + 1) << k;
        let bytes = hex::decode(s).map_err(|e| Error::Descriptor(format!("bad hex: {e}")))?;
        if bytes.len() != entries.div_ceil(8) {
            return Err(Error::Descriptor(format!(
                "core hex carries {} bytes, expected {} for k = {k}, m = {m}",
                bytes.len(),
                entries.div_ceil(8)
            )));
        }
        for (j, &b) in bytes.iter().enumerate() {
            c.bits[j / 8] |= (b as u64) << (8 * (j % 8));
        }
        if !entries.is_multiple_of(64) {
            if let Some(&last) = c.bits.last() {
                if last >> (entries % 64) != 0 {
                    return Err(Error::Descriptor(
                        "core hex sets bits beyond the table".into(),
                    ));
                }
            }
        }
        Ok(c)
    }
}

/// A permutation of the `n` variable labels.
///
/// `map(i)` is the image of variable `i`. Applying `sigma` to a function
/// relabels its inputs: see [`FunctionView::apply_isomorphism`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Isomorphism {
    perm: Vec<usize>,
}

impl Isomorphism {
    pub fn identity(n: usize) -> Self {
        Isomorphism {
            perm: (0..n).collect(),
        }
    }

    /// Validate that `perm` is a permutation of `0..perm.len()`.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidPermutation { n });
            }
            seen[p] = true;
        }
        Ok(Isomorphism { perm })
    }

    /// Uniformly random permutation (Fisher–Yates).
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Isomorphism { perm }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    #[inline]
    pub fn map(&self, i: usize) -> usize {
        self.perm[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self) -> Isomorphism {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Isomorphism { perm: inv }
    }

    /// Composition `self ∘ other`: variable `i` maps to
    /// `self.map(other.map(i))`. Relabeling twice obeys
    /// `f.apply(σ).apply(τ) == f.apply(τ.compose(σ))`.
    pub fn compose(&self, other: &Isomorphism) -> Result<Isomorphism> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(Isomorphism {
            perm: other.perm.iter().map(|&i| self.perm[i]).collect(),
        })
    }
}

/// One evaluation interface over the three representations.
#[derive(Clone, Debug)]
pub enum FunctionView {
    Table(TruthTable),
    Junta {
        n: usize,
        core: JuntaCore,
        positions: Vec<usize>,
    },
    Psf {
        n: usize,
        core: PsfCore,
        positions: Vec<usize>,
    },
}

fn check_positions(n: usize, k: usize, positions: &[usize]) -> Result<()> {
    if positions.len() != k {
        return Err(Error::InvalidParameter(format!(
            "core reads {k} slots but {} positions given",
            positions.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in positions {
        if p >= n {
            return Err(Error::InvalidParameter(format!(
                "position {p} outside 0..{n}"
            )));
        }
        if seen[p] {
            return Err(Error::InvalidParameter(format!("position {p} repeated")));
        }
        seen[p] = true;
    }
    Ok(())
}

impl FunctionView {
    pub fn table(t: TruthTable) -> Self {
        FunctionView::Table(t)
    }

    /// Junta over `n` variables; core slot `j` reads variable `positions[j]`.
    pub fn junta(n: usize, core: JuntaCore, positions: Vec<usize>) -> Result<Self> {
        check_positions(n, core.k(), &positions)?;
        Ok(FunctionView::Junta { n, core, positions })
    }

    /// Partially symmetric function over `n` variables; slot `j` of the core
    /// reads variable `positions[j]`, the rest enter by weight.
    pub fn psf(n: usize, core: PsfCore, positions: Vec<usize>) -> Result<Self> {
        check_positions(n, core.k(), &positions)?;
        if core.m() != n - core.k() {
            return Err(Error::InvalidParameter(format!(
                "core expects {} symmetric variables but n - k = {}",
                core.m(),
                n - core.k()
            )));
        }
        Ok(FunctionView::Psf { n, core, positions })
    }

    pub fn n(&self) -> usize {
        match self {
            FunctionView::Table(t) => t.n(),
            FunctionView::Junta { n, .. } => *n,
            FunctionView::Psf { n, .. } => *n,
        }
    }

    pub fn eval(&self, x: &BitVector) -> bool {
        assert_eq!(
            x.n(),
            self.n(),
            "point width {} != function width {}",
            x.n(),
            self.n()
        );
        self.eval_words(x.words())
    }

    /// Evaluate a packed point given as raw words (the batch-oracle hot path).
    #[inline]
    pub fn eval_words(&self, words: &[u64]) -> bool {
        match self {
            FunctionView::Table(t) => t.get(words[0]),
            FunctionView::Junta {
                core, positions, ..
            } => {
                let mut slots = 0u64;
                for (j, &p) in positions.iter().enumerate() {
                    slots |= ((words[p >> 6] >> (p & 63)) & 1) << j;
                }
                core.get(slots)
            }
            FunctionView::Psf {
                core, positions, ..
            } => {
                let total: u32 = words.iter().map(|w| w.count_ones()).sum();
                let mut slots = 0u64;
                let mut inside = 0u32;
                for (j, &p) in positions.iter().enumerate() {
                    let b = (words[p >> 6] >> (p & 63)) & 1;
                    slots |= b << j;
                    inside += b as u32;
                }
                core.get(slots, (total - inside) as usize)
            }
        }
    }

    /// Relabel inputs by `sigma`: the result `g` satisfies
    /// `g(x) = f(x ∘ sigma)` where `(x ∘ sigma)_i = x_{sigma(i)}`.
    ///
    /// Structured representations stay structured — a junta's position list
    /// moves from `p_j` to `sigma(p_j)` — so the isomorphic copy costs O(k),
    /// not another table.
    pub fn apply_isomorphism(&self, sigma: &Isomorphism) -> Result<FunctionView> {
        if sigma.n() != self.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: sigma.n(),
            });
        }
        Ok(match self {
            FunctionView::Table(t) => {
                let n = t.n();
                let mut out = TruthTable::zeros(n)?;
                for idx in 0..(1u64 << n) {
                    let mut src = 0u64;
                    for i in 0..n {
                        src |= ((idx >> sigma.map(i)) & 1) << i;
                    }
                    out.set(idx, t.get(src));
                }
                FunctionView::Table(out)
            }
            FunctionView::Junta { n, core, positions } => FunctionView::Junta {
                n: *n,
                core: core.clone(),
                positions: positions.iter().map(|&p| sigma.map(p)).collect(),
            },
            FunctionView::Psf { n, core, positions } => FunctionView::Psf {
                n: *n,
                core: core.clone(),
                positions: positions.iter().map(|&p| sigma.map(p)).collect(),
            },
        })
    }

    /// Materialize as an explicit table (requires `n <= MAX_TABLE_VARS`).
    pub fn to_table(&self) -> Result<TruthTable> {
        let n = self.n();
        if n > MAX_TABLE_VARS {
            return Err(Error::TableTooLarge {
                n,
                max: MAX_TABLE_VARS,
            });
        }
        if let FunctionView::Table(t) = self {
            return Ok(t.clone());
        }
        let mut t = TruthTable::zeros(n)?;
        for idx in 0..(1u64 << n) {
            if self.eval_words(&[idx]) {
                t.set(idx, true);
            }
        }
        Ok(t)
    }
}

/// How [`distance`] measures disagreement.
#[derive(Clone, Copy, Debug)]
pub enum DistanceMode {
    /// Exhaust all `2^n` points (`n <= MAX_TABLE_VARS`).
    Exact,
    /// Seeded Monte-Carlo estimate from `samples` uniform points.
    Sampled { samples: u64, seed: u64 },
}

/// Fraction of the cube where `f` and `g` disagree, as an exact pair
/// `(disagreements, 2^n)`.
pub fn distance_exact_counts(f: &FunctionView, g: &FunctionView) -> Result<(u64, u64)> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            left: f.n(),
            right: g.n(),
        });
    }
    let n = f.n();
    if n > MAX_TABLE_VARS {
        return Err(Error::ExactPathTooLarge {
            n,
            max: MAX_TABLE_VARS,
        });
    }
    // Table-vs-table collapses to an xor popcount.
    if let (FunctionView::Table(a), FunctionView::Table(b)) = (f, g) {
        return Ok((a.diff_count(b)?, 1u64 << n));
    }
    let mut diff = 0u64;
    for idx in 0..(1u64 << n) {
        let w = [idx];
        if f.eval_words(&w) != g.eval_words(&w) {
            diff += 1;
        }
    }
    Ok((diff, 1u64 << n))
}

/// Normalized Hamming distance `Pr_x[f(x) != g(x)]`.
pub fn distance(f: &FunctionView, g: &FunctionView, mode: DistanceMode) -> Result<f64> {
    match mode {
        DistanceMode::Exact => {
            let (diff, total) = distance_exact_counts(f, g)?;
            Ok(diff as f64 / total as f64)
        }
        DistanceMode::Sampled { samples, seed } => {
            if f.n() != g.n() {
                return Err(Error::DimensionMismatch {
                    left: f.n(),
                    right: g.n(),
                });
            }
            if samples == 0 {
                return Err(Error::InvalidParameter(
                    "sampled distance needs samples > 0".into(),
                ));
            }
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut diff = 0u64;
            let mut words = vec![0u64; words_for(f.n())];
            for _ in 0..samples {
                crate::bits::fill_random(&mut words, f.n(), &mut rng);
                if f.eval_words(&words) != g.eval_words(&words) {
                    diff += 1;
                }
            }
            Ok(diff as f64 / samples as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn junta_reads_only_its_positions() {
        // core = XOR of two slots; slot 0 reads variable 5, slot 1 reads 2.
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| (u.count_ones() & 1) == 1).unwrap());
        let f = FunctionView::junta(8, core, vec![5, 2]).unwrap();
        let mut x = BitVector::zeros(8);
        x.set(5, true);
        assert!(f.eval(&x));
        x.set(2, true);
        assert!(!f.eval(&x));
        // Untouched variables are dead.
        x.set(0, true);
        x.set(7, true);
        assert!(!f.eval(&x));
    }

    #[test]
    fn psf_eval_hand_checked() {
        // k = 2, m = 3: core is 1 exactly on (u = 11, w = 1).
        // Slots read variables 4 and 1; x = {vars 1, 2, 4} gives u = (1,1),
        // symmetric weight 3 - 2 = 1, so f(x) = 1. Moving the set bit off a
        // slot position changes u and kills it.
        let core = PsfCore::from_fn(2, 3, |u, w| u == 0b11 && w == 1).unwrap();
        let f = FunctionView::psf(5, core, vec![4, 1]).unwrap();
        let x = BitVector::from_index(5, 0b10110);
        assert!(f.eval(&x));
        let y = BitVector::from_index(5, 0b00110); // drop variable 4: u = (0,1)
        assert!(!f.eval(&y));
        let z = BitVector::from_index(5, 0b11110); // extra symmetric one: w = 2
        assert!(!f.eval(&z));
    }

    #[test]
    fn psf_depends_on_symmetric_vars_only_through_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let core = PsfCore::random(2, 4, &mut rng).unwrap();
        let f = FunctionView::psf(6, core, vec![0, 3]).unwrap();
        // Swap two symmetric variables (1 and 5): value must not change.
        for idx in 0..64u64 {
            let x = BitVector::from_index(6, idx);
            let mut y = x.clone();
            let (b1, b5) = (x.get(1), x.get(5));
            y.set(1, b5);
            y.set(5, b1);
            assert_eq!(f.eval(&x), f.eval(&y), "idx = {idx}");
        }
    }

    #[test]
    fn psf_core_indexing_round_trips() {
        let mut c = PsfCore::zeros(3, 5).unwrap();
        for w in 0..=5usize {
            for u in 0..8u64 {
                let v = (u + w as u64).is_multiple_of(3);
                c.set(u, w, v);
            }
        }
        for w in 0..=5usize {
            for u in 0..8u64 {
                assert_eq!(c.get(u, w), (u + w as u64).is_multiple_of(3));
            }
        }
        let back = PsfCore::from_hex(3, 5, &c.to_hex()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn isomorphism_moves_junta_positions_forward() {
        // f(x) = x_0 AND x_1 over n = 4; sigma = rotation i -> i + 1 mod 4.
        // g(x) = f(x ∘ sigma) reads x_{sigma(0)} = x_1 and x_{sigma(1)} = x_2.
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| u == 0b11).unwrap());
        let f = FunctionView::junta(4, core, vec![0, 1]).unwrap();
        let sigma = Isomorphism::new(vec![1, 2, 3, 0]).unwrap();
        let g = f.apply_isomorphism(&sigma).unwrap();
        match &g {
            FunctionView::Junta { positions, .. } => assert_eq!(positions, &vec![1, 2]),
            other => panic!("expected junta, got {other:?}"),
        }
        for idx in 0..16u64 {
            let x = BitVector::from_index(4, idx);
            assert_eq!(g.eval(&x), x.get(1) && x.get(2));
        }
    }

    #[test]
    fn table_and_junta_relabel_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let core = JuntaCore::random(3, &mut rng).unwrap();
            let f = FunctionView::junta(6, core, vec![4, 0, 2]).unwrap();
            let sigma = Isomorphism::random(6, &mut rng);
            let via_junta = f.apply_isomorphism(&sigma).unwrap();
            let via_table = FunctionView::table(f.to_table().unwrap())
                .apply_isomorphism(&sigma)
                .unwrap();
            let (diff, _) = distance_exact_counts(&via_junta, &via_table).unwrap();
            assert_eq!(diff, 0);
        }
    }

    #[test]
    fn composition_law_exhaustive_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let t = TruthTable::random(4, &mut rng).unwrap();
            let f = FunctionView::table(t);
            let sigma = Isomorphism::random(4, &mut rng);
            let tau = Isomorphism::random(4, &mut rng);
            let twice = f
                .apply_isomorphism(&sigma)
                .unwrap()
                .apply_isomorphism(&tau)
                .unwrap();
            let once = f.apply_isomorphism(&tau.compose(&sigma).unwrap()).unwrap();
            let (diff, _) = distance_exact_counts(&twice, &once).unwrap();
            assert_eq!(diff, 0);
        }
    }

    #[test]
    fn inverse_relabel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let t = TruthTable::random(5, &mut rng).unwrap();
        let f = FunctionView::table(t);
        let sigma = Isomorphism::random(5, &mut rng);
        let back = f
            .apply_isomorphism(&sigma)
            .unwrap()
            .apply_isomorphism(&sigma.inverse())
            .unwrap();
        let (diff, _) = distance_exact_counts(&f, &back).unwrap();
        assert_eq!(diff, 0);
        assert!(sigma.inverse().compose(&sigma).unwrap().is_identity());
    }

    #[test]
    fn distance_exact_and_sampled_agree_roughly() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = FunctionView::table(TruthTable::random(10, &mut rng).unwrap());
        let b = FunctionView::table(TruthTable::random(10, &mut rng).unwrap());
        let exact = distance(&a, &b, DistanceMode::Exact).unwrap();
        let sampled = distance(
            &a,
            &b,
            DistanceMode::Sampled {
                samples: 200_000,
                seed: 7,
            },
        )
        .unwrap();
        assert!(
            (exact - sampled).abs() < 0.01,
            "exact {exact}, sampled {sampled}"
        );
    }

    #[test]
    fn identical_functions_have_distance_zero() {
        let core = JuntaCore::new(TruthTable::from_fn(3, |u| u % 2 == 1).unwrap());
        let f = FunctionView::junta(10, core, vec![9, 1, 4]).unwrap();
        assert_eq!(distance(&f, &f.clone(), DistanceMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        let core = JuntaCore::new(TruthTable::from_fn(2, |u| u == 0).unwrap());
        assert!(FunctionView::junta(4, core.clone(), vec![0]).is_err()); // wrong count
        assert!(FunctionView::junta(4, core.clone(), vec![0, 4]).is_err()); // out of range
        assert!(FunctionView::junta(4, core, vec![1, 1]).is_err()); // repeated
        let psf = PsfCore::zeros(2, 3).unwrap();
        assert!(FunctionView::psf(6, psf, vec![0, 1]).is_err()); // m != n - k
        assert!(Isomorphism::new(vec![0, 0, 1]).is_err());
        assert!(TruthTable::zeros(25).is_err());
    }

    #[test]
    #[should_panic(expected = "point width")]
    fn eval_panics_on_width_mismatch() {
        let f = FunctionView::table(TruthTable::zeros(4).unwrap());
        f.eval(&BitVector::zeros(5));
    }
}
