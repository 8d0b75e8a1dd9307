//! Shared fixtures for the pipeline benchmarks: deterministic planted
//! instances so criterion compares like with like across runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use locorr::{make_oracle, FunctionView, Isomorphism, JuntaCore, NoiseSpec, Oracle, PsfCore};

/// A planted k-junta served at corruption rate `epsilon` behind a strict
/// batch oracle, everything derived from `seed`.
pub fn planted_junta_oracle(k: usize, n: usize, epsilon: f64, seed: u64) -> (JuntaCore, Oracle) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = JuntaCore::random(k, &mut rng).expect("junta core");
    let positions = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let f = FunctionView::junta(n, core.clone(), positions).expect("junta view");
    let sigma = Isomorphism::random(n, &mut rng);
    let noise = NoiseSpec::procedural(epsilon, 0x5eed);
    let oracle = make_oracle(&f, &sigma, &noise).expect("oracle").strict();
    (core, oracle)
}

/// A planted partially symmetric instance under the same conventions.
pub fn planted_psf_oracle(k: usize, n: usize, epsilon: f64, seed: u64) -> (PsfCore, Oracle) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = PsfCore::random(k, n - k, &mut rng).expect("psf core");
    let positions = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let f = FunctionView::psf(n, core.clone(), positions).expect("psf view");
    let sigma = Isomorphism::random(n, &mut rng);
    let noise = NoiseSpec::procedural(epsilon, 0x5eed);
    let oracle = make_oracle(&f, &sigma, &noise).expect("oracle").strict();
    (core, oracle)
}
