//! Packed points of the Boolean cube.
//!
//! A point of `{0,1}^n` is stored as `ceil(n/64)` little-endian words:
//! variable `i` lives in word `i / 64` at bit `i % 64`. The same
//! least-significant-bit-first convention is used everywhere a point is
//! flattened to an integer or a byte stream — variable 0 is the low bit of a
//! truth-table index, and byte `j` of the hex encoding carries variables
//! `8j..8j+8`. Bits above `n` in the last word are always zero, so whole-word
//! comparisons and hashes are well defined.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of 64-bit words needed for `n` bits.
#[inline]
pub(crate) const fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize, value: bool) {
    let mask = 1u64 << (i & 63);
    if value {
        words[i >> 6] |= mask;
    } else {
        words[i >> 6] &= !mask;
    }
}

/// Collect the bits at `positions` into a small integer, position `j` of the
/// list landing at bit `j`.
#[inline]
pub(crate) fn gather_bits(words: &[u64], positions: &[usize]) -> u64 {
    let mut out = 0u64;
    for (j, &p) in positions.iter().enumerate() {
        out |= ((words[p >> 6] >> (p & 63)) & 1) << j;
    }
    out
}

/// Reorder the low bits of `u`: bit `j` of the result is bit `perm[j]` of `u`.
#[inline]
pub(crate) fn permute_slots(u: usize, perm: &[usize]) -> usize {
    let mut v = 0usize;
    for (j, &pj) in perm.iter().enumerate() {
        v |= ((u >> pj) & 1) << j;
    }
    v
}

/// Fill `words` with uniform bits for an `n`-variable point, zeroing the tail.
#[inline]
pub(crate) fn fill_random(words: &mut [u64], n: usize, rng: &mut impl Rng) {
    for w in words.iter_mut() {
        *w = rng.random();
    }
    let tail = n & 63;
    if tail != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << tail) - 1;
        }
    }
}

/// A point of the Boolean cube with a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "BitVectorRepr", try_from = "BitVectorRepr")]
pub struct BitVector {
    n: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// The all-zeros point.
    pub fn zeros(n: usize) -> Self {
        BitVector {
            n,
            words: vec![0; words_for(n)],
        }
    }

    /// Build from explicit bit values; `bits[i]` is variable `i`.
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                set_bit(&mut v.words, i, true);
            }
        }
        v
    }

    /// Interpret the low `n` bits of `index` as a point (variable 0 = bit 0).
    ///
    /// Only meaningful for `n <= 64`; the bits of `index` at positions `>= n`
    /// must be zero.
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n <= 64, "from_index needs n <= 64, got {n}");
        assert!(
            n == 64 || index >> n == 0,
            "index has bits above variable {n}"
        );
        let mut v = BitVector::zeros(n);
        if n > 0 {
            v.words[0] = index;
        }
        v
    }

    /// Uniformly random point.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut v = BitVector::zeros(n);
        fill_random(&mut v.words, n, rng);
        v
    }

    pub(crate) fn from_words(n: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(n));
        debug_assert!(n.is_multiple_of(64) || words.last().is_none_or(|w| w >> (n % 64) == 0));
        BitVector { n, words }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n, "variable {i} out of range for n = {}", self.n);
        get_bit(&self.words, i)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.n, "variable {i} out of range for n = {}", self.n);
        set_bit(&mut self.words, i, value);
    }

    /// Hamming weight.
    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Copy with variable `i` negated.
    pub fn flipped(&self, i: usize) -> Self {
        let mut v = self.clone();
        v.set(i, !v.get(i));
        v
    }

    /// The packed words (tail bits above `n` are zero).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Collapse to a truth-table index; requires `n <= 64`.
    pub fn to_index(&self) -> u64 {
        assert!(self.n <= 64, "to_index needs n <= 64, got {}", self.n);
        self.words.first().copied().unwrap_or(0)
    }

    /// Hex encoding of the `ceil(n/8)` little-endian bytes.
    pub fn to_hex(&self) -> String {
        let nbytes = self.n.div_ceil(8);
        let mut bytes = Vec::with_capacity(nbytes);
        for w in &self.words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        bytes.truncate(nbytes);
        hex::encode(bytes)
    }

    /// Inverse of [`to_hex`](Self::to_hex); the string must carry exactly
    /// `ceil(n/8)` bytes and no bits above variable `n-1`.
    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Descriptor(format!("bad hex: {e}")))?;
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::Descriptor(format!(
                "hex carries {} bytes, expected {} for n = {n}",
                bytes.len(),
                n.div_ceil(8)
            )));
        }
        let mut words = vec![0u64; words_for(n)];
        for (j, &b) in bytes.iter().enumerate() {
            words[j / 8] |= (b as u64) << (8 * (j % 8));
        }
        if !n.is_multiple_of(64) {
            if let Some(&last) = words.last() {
                if last >> (n % 64) != 0 {
                    return Err(Error::Descriptor(format!(
                        "hex sets bits above variable {}",
                        n - 1
                    )));
                }
            }
        }
        Ok(BitVector { n, words })
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(n={}, {})", self.n, self.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct BitVectorRepr {
    n: usize,
    hex: String,
}

impl From<BitVector> for BitVectorRepr {
    fn from(v: BitVector) -> Self {
        BitVectorRepr {
            n: v.n,
            hex: v.to_hex(),
        }
    }
}

impl TryFrom<BitVectorRepr> for BitVector {
    type Error = Error;
    fn try_from(r: BitVectorRepr) -> Result<Self> {
        BitVector::from_hex(r.n, &r.hex)
    }
}

/// A flat, append-only buffer of same-width points.
///
/// Query batches run into the millions of points, so the matrix keeps one
/// contiguous `Vec<u64>` instead of a `Vec<BitVector>` — pushing a point is a
/// word copy, and answering a batch walks the buffer row by row without
/// touching the allocator.
#[derive(Clone)]
pub struct PointMatrix {
    n: usize,
    wpp: usize,
    words: Vec<u64>,
}

impl PointMatrix {
    pub fn new(n: usize) -> Self {
        PointMatrix {
            n,
            wpp: words_for(n),
            words: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, points: usize) -> Self {
        let wpp = words_for(n);
        PointMatrix {
            n,
            wpp,
            words: Vec::with_capacity(wpp * points),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len().checked_div(self.wpp).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Drop all rows, keeping the allocation.
    pub fn clear(&mut self) {
        self.words.clear();
    }

    pub fn push(&mut self, x: &BitVector) {
        assert_eq!(
            x.n(),
            self.n,
            "point width {} != matrix width {}",
            x.n(),
            self.n
        );
        self.words.extend_from_slice(x.words());
    }

    /// Append a row given as raw words (tail bits must already be zero).
    pub fn push_words(&mut self, words: &[u64]) {
        debug_assert_eq!(words.len(), self.wpp);
        self.words.extend_from_slice(words);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.wpp..(i + 1) * self.wpp]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.words.chunks_exact(self.wpp.max(1))
    }

    /// Copy row `i` out as a [`BitVector`].
    pub fn row_vector(&self, i: usize) -> BitVector {
        BitVector::from_words(self.n, self.row(i).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn variable_zero_is_low_bit_of_index() {
        let v = BitVector::from_index(5, 0b00101);
        assert!(v.get(0));
        assert!(!v.get(1));
        assert!(v.get(2));
        assert_eq!(v.to_index(), 0b00101);
        assert_eq!(v.weight(), 2);
    }

    #[test]
    fn hex_round_trips_across_word_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 7, 8, 9, 63, 64, 65, 128, 130, 200] {
            for _ in 0..20 {
                let v = BitVector::random(n, &mut rng);
                let back = BitVector::from_hex(n, &v.to_hex()).unwrap();
                assert_eq!(v, back, "n = {n}");
            }
        }
    }

    #[test]
    fn hex_layout_is_byte_per_eight_variables() {
        // Variables 0..8 fill byte 0, low bit first: setting variable 1 and 9
        // gives bytes 0x02, 0x02.
        let mut v = BitVector::zeros(12);
        v.set(1, true);
        v.set(9, true);
        assert_eq!(v.to_hex(), "0202");
    }

    #[test]
    fn from_hex_rejects_bad_input() {
        assert!(BitVector::from_hex(8, "0q").is_err());
        assert!(BitVector::from_hex(8, "0102").is_err()); // too many bytes
        assert!(BitVector::from_hex(4, "10").is_err()); // bit above variable 3
    }

    #[test]
    fn random_points_keep_tail_bits_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = BitVector::random(67, &mut rng);
            assert_eq!(v.words()[1] >> 3, 0);
        }
    }

    #[test]
    fn matrix_rows_match_pushed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut m = PointMatrix::with_capacity(70, 16);
        let pts: Vec<BitVector> = (0..16).map(|_| BitVector::random(70, &mut rng)).collect();
        for p in &pts {
            m.push(p);
        }
        assert_eq!(m.len(), 16);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(m.row(i), p.words());
            assert_eq!(&m.row_vector(i), p);
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn get_panics_out_of_range() {
        BitVector::zeros(4).get(4);
    }
}
