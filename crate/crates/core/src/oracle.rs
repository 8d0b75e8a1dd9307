//! Query access to a corrupted isomorphic copy of a target function.
//!
//! [`make_oracle`] composes the two transformations in a fixed order: the
//! relabeling `sigma` is applied to the target first, then noise is injected
//! relative to the relabeled function `f_sigma`. The oracle answers points of
//! `g` where `dist(g, f_sigma) <= epsilon`, counts every answered query, and
//! never exposes `sigma` or the flip set.
//!
//! Three noise constructions:
//!
//! * **exact fraction** — `floor(epsilon * 2^n)` distinct points drawn
//!   seeded and flipped; the corruption rate is exact by construction, which
//!   makes small-`n` closeness claims checkable to the bit. Requires the
//!   flip set to be materializable (`n <= 24`).
//! * **procedural** — a point is flipped when its keyed 64-bit hash falls
//!   below `epsilon * 2^64`. Flip decisions are a deterministic function of
//!   `(seed, point)`, need no storage, and concentrate tightly around rate
//!   `epsilon`, so this is the mode that scales to `n = 128` and beyond.
//! * **adversarial** — an explicit list of points to flip, for worst-case
//!   placements and regression fixtures.
//!
//! Queries run in one of two disciplines. Free queries ([`Oracle::query`])
//! answer immediately. Batch discipline collects every point first
//! ([`Oracle::begin_batch`], [`BatchSession::submit`]), seals the session,
//! and only then releases answers — the shape a non-adaptive algorithm is
//! obliged to have. A *strict* oracle refuses free queries outright, so a
//! corrector that compiles against one is non-adaptive by construction, not
//! by convention.

use std::collections::HashSet;
use std::hash::Hasher;
use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};

use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher13;

use crate::bits::{BitVector, PointMatrix};
use crate::boolfn::{FunctionView, Isomorphism};
use crate::error::{Error, Result};

/// Largest `n` for which exact-fraction flip sets are materialized.
pub const MAX_EXACT_FRACTION_VARS: usize = 24;

/// Key salt for the procedural flip hash; the other half of the key is the
/// noise seed.
const PROCEDURAL_SALT: u64 = 0x6c6f_636f_7272_2e31; // "locorr.1"

/// How the corruption is constructed.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum NoiseMode {
    ExactFraction,
    Procedural,
    Adversarial { points: Vec<BitVector> },
}

/// Noise construction plus its rate and seed.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn exact_fraction(epsilon: f64, seed: u64) -> Self {
        NoiseSpec {
            epsilon,
            seed,
            mode: NoiseMode::ExactFraction,
        }
    }

    pub fn procedural(epsilon: f64, seed: u64) -> Self {
        NoiseSpec {
            epsilon,
            seed,
            mode: NoiseMode::Procedural,
        }
    }

    pub fn adversarial(points: Vec<BitVector>) -> Self {
        NoiseSpec {
            epsilon: 0.0,
            seed: 0,
            mode: NoiseMode::Adversarial { points },
        }
    }

    /// No corruption at all.
    pub fn none() -> Self {
        NoiseSpec::procedural(0.0, 0)
    }
}

enum FlipSet {
    /// Explicit point indices, for exact-fraction noise at small `n`.
    Indices(HashSet<u64>),
    /// Keyed-hash threshold test, for procedural noise at any `n`.
    Keyed { k0: u64, k1: u64, threshold: u64 },
    /// Explicit point list, for adversarial noise.
    Listed(HashSet<Box<[u64]>>),
}

impl FlipSet {
    #[inline]
    fn contains(&self, n: usize, words: &[u64]) -> bool {
        match self {
            FlipSet::Indices(set) => set.contains(&words[0]),
            FlipSet::Keyed { k0, k1, threshold } => {
                if *threshold == 0 {
                    return false;
                }
                let mut h = SipHasher13::new_with_keys(*k0, *k1);
                h.write_u64(n as u64);
                for &w in words {
                    h.write_u64(w);
                }
                h.finish() < *threshold
            }
            FlipSet::Listed(set) => set.contains(words),
        }
    }
}

/// Access phases: free queries, collecting a batch, answering a batch.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[repr(u8)]
enum Phase {
    Free = 0,
    Collecting = 1,
    Answering = 2,
}

/// Counted query access to `g`, an `epsilon`-corruption of `f_sigma`.
pub struct Oracle {
    target: FunctionView,
    flips: FlipSet,
    count: AtomicU64,
    phase: AtomicU8,
    strict: bool,
}

/// Build the oracle for `f.apply_isomorphism(sigma)` corrupted per `noise`.
pub fn make_oracle(f: &FunctionView, sigma: &Isomorphism, noise: &NoiseSpec) -> Result<Oracle> {
    let n = f.n();
    let target = f.apply_isomorphism(sigma)?;
    if !matches!(noise.mode, NoiseMode::Adversarial { .. }) && !(0.0..1.0).contains(&noise.epsilon)
    {
        return Err(Error::InvalidParameter(format!(
            "noise rate {} outside [0, 1)",
            noise.epsilon
        )));
    }
    let flips = match &noise.mode {
        NoiseMode::ExactFraction => {
            if n > MAX_EXACT_FRACTION_VARS {
                return Err(Error::ExactFractionScale {
                    n,
                    max: MAX_EXACT_FRACTION_VARS,
                });
            }
            let total = 1usize << n;
            let amount = (noise.epsilon * total as f64).floor() as usize;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(noise.seed);
            let picked = rand::seq::index::sample(&mut rng, total, amount);
            FlipSet::Indices(picked.into_iter().map(|i| i as u64).collect())
        }
        NoiseMode::Procedural => {
            let threshold = if noise.epsilon <= 0.0 {
                0
            } else {
                (noise.epsilon * 2f64.powi(64)) as u64
            };
            FlipSet::Keyed {
                k0: noise.seed,
                k1: PROCEDURAL_SALT,
                threshold,
            }
        }
        NoiseMode::Adversarial { points } => {
            let mut set = HashSet::with_capacity(points.len());
            for p in points {
                if p.n() != n {
                    return Err(Error::DimensionMismatch {
                        left: n,
                        right: p.n(),
                    });
                }
                set.insert(p.words().to_vec().into_boxed_slice());
            }
            FlipSet::Listed(set)
        }
    };
    Ok(Oracle {
        target,
        flips,
        count: AtomicU64::new(0),
        phase: AtomicU8::new(Phase::Free as u8),
        strict: false,
    })
}

impl Oracle {
    /// Refuse free queries from now on; only batch discipline remains.
    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn n(&self) -> usize {
        self.target.n()
    }

    /// Total points answered so far, duplicates included. Never resets.
    pub fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    #[inline]
    fn answer_words(&self, words: &[u64]) -> bool {
        self.target.eval_words(words) ^ self.flips.contains(self.target.n(), words)
    }

    fn phase(&self) -> Phase {
        match self.phase.load(Ordering::Acquire) {
            0 => Phase::Free,
            1 => Phase::Collecting,
            _ => Phase::Answering,
        }
    }

    /// Answer a single point immediately.
    ///
    /// Fails on a strict oracle, and on any oracle while a batch session is
    /// open — interleaving free queries with batch collection is exactly the
    /// adaptivity the discipline exists to rule out.
    pub fn query(&self, x: &BitVector) -> Result<bool> {
        assert_eq!(
            x.n(),
            self.n(),
            "point width {} != oracle width {}",
            x.n(),
            self.n()
        );
        if self.strict {
            return Err(Error::PhaseViolation(
                "strict oracle answers batches only; collect queries up front".into(),
            ));
        }
        if self.phase() != Phase::Free {
            return Err(Error::PhaseViolation(
                "free query while a batch session is open".into(),
            ));
        }
        self.count.fetch_add(1, Ordering::Relaxed);
        Ok(self.answer_words(x.words()))
    }

    /// Answer a pre-collected batch. Duplicates are answered consistently and
    /// every row is counted.
    pub fn batch_matrix(&self, points: &PointMatrix) -> Vec<bool> {
        assert_eq!(
            points.n(),
            self.n(),
            "batch width {} != oracle width {}",
            points.n(),
            self.n()
        );
        self.count.fetch_add(points.len() as u64, Ordering::Relaxed);
        points.rows().map(|row| self.answer_words(row)).collect()
    }

    /// Convenience wrapper over [`batch_matrix`](Self::batch_matrix).
    pub fn batch(&self, xs: &[BitVector]) -> Vec<bool> {
        let mut m = PointMatrix::with_capacity(self.n(), xs.len());
        for x in xs {
            m.push(x);
        }
        self.batch_matrix(&m)
    }

    /// Open an explicit collect-then-answer session.
    pub fn begin_batch(&self) -> BatchSession<'_> {
        self.phase.store(Phase::Collecting as u8, Ordering::Release);
        BatchSession {
            oracle: self,
            points: PointMatrix::new(self.n()),
            sealed: false,
        }
    }
}

/// An in-progress batch: submit points, seal, then read answers.
pub struct BatchSession<'a> {
    oracle: &'a Oracle,
    points: PointMatrix,
    sealed: bool,
}

impl BatchSession<'_> {
    pub fn submit(&mut self, x: &BitVector) -> Result<()> {
        if self.sealed {
            return Err(Error::PhaseViolation(
                "submit after the batch was sealed".into(),
            ));
        }
        self.points.push(x);
        Ok(())
    }

    pub fn submit_all<'b>(&mut self, xs: impl IntoIterator<Item = &'b BitVector>) -> Result<()> {
        for x in xs {
            self.submit(x)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Close collection; no further submissions are accepted.
    pub fn seal(&mut self) {
        self.sealed = true;
        self.oracle
            .phase
            .store(Phase::Answering as u8, Ordering::Release);
    }

    /// Answers in submission order. Only available once sealed.
    pub fn answers(&self) -> Result<Vec<bool>> {
        if !self.sealed {
            return Err(Error::PhaseViolation(
                "answers requested before the batch was sealed".into(),
            ));
        }
        Ok(self.oracle.batch_matrix(&self.points))
    }
}

impl Drop for BatchSession<'_> {
    fn drop(&mut self) {
        self.oracle
            .phase
            .store(Phase::Free as u8, Ordering::Release);
    }
}
