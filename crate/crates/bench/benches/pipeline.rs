//! Benchmarks along the pipeline's hot path: oracle batches, the two
//! influence estimators, structured sampling, exact brute-force influence,
//! and a full desk-scale correction.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locorr::{
    estimate_influence, estimate_symmetric_influence, influence_exact, locally_correct_junta,
    locally_correct_psf, random_partition, sample_balanced, BitVector, ConstantsProfile,
    EstimatorParams, FunctionView, TruthTable, VarSet, WorkspaceSampler,
};
use locorr_bench::{planted_junta_oracle, planted_psf_oracle};

fn bench_oracle_batch(c: &mut Criterion) {
    let n = 128;
    let (_, oracle) = planted_junta_oracle(4, n, 0.001, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let batch: Vec<BitVector> = (0..4096).map(|_| BitVector::random(n, &mut rng)).collect();
    let mut group = c.benchmark_group("oracle");
    group.throughput(Throughput::Elements(4096));
    group.bench_function("batch_4096_n128", |b| {
        b.iter(|| {
            let mut session = oracle.begin_batch();
            session.submit_all(&batch).unwrap();
            session.seal();
            session.answers().unwrap()
        })
    });
    group.finish();
}

fn bench_estimators(c: &mut Criterion) {
    let n = 128;
    let (_, oracle) = planted_junta_oracle(4, n, 0.001, 3);
    let j = VarSet::new((0..8).collect()).unwrap();
    let params = EstimatorParams::new(0.1, 0.05).unwrap();
    let mut group = c.benchmark_group("estimators");
    group.throughput(Throughput::Elements(2 * params.rounds()));
    group.bench_function("influence_n128", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        b.iter(|| estimate_influence(&oracle, &j, &params, &mut rng))
    });
    group.bench_function("symmetric_influence_n128", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        b.iter(|| estimate_symmetric_influence(&oracle, &j, &params, &mut rng))
    });
    group.finish();
}

fn bench_exact_influence(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = FunctionView::table(TruthTable::random(16, &mut rng).unwrap());
    let j = VarSet::new(vec![1, 5, 9, 13]).unwrap();
    c.bench_function("exact_influence_n16", |b| {
        b.iter(|| influence_exact(&f, &j).unwrap())
    });
}

fn bench_sampling(c: &mut Criterion) {
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ground = VarSet::full(n);
    let balanced = random_partition(&ground, n, 64, &mut rng).unwrap();

    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); 17];
    for v in 0..n {
        blocks[v % 17].push(v);
    }
    let with_workspace = locorr::Partition::new(n, blocks, Some(16)).unwrap();
    let sampler = WorkspaceSampler::new(&with_workspace).unwrap();

    let mut group = c.benchmark_group("sampling");
    group.bench_function("balanced_n128_64blocks", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        b.iter(|| sample_balanced(&balanced, &mut rng).unwrap())
    });
    group.bench_function("workspace_n128_17blocks", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        b.iter(|| sampler.draw(&mut rng))
    });
    group.finish();
}

fn bench_correctors(c: &mut Criterion) {
    // Desk-scale profile: the full pipeline shape at a fraction of the
    // query volume, so one iteration stays in the tens of milliseconds.
    let profile = ConstantsProfile::scaled(100)
        .unwrap()
        .with_set_finder_eps(0.1)
        .unwrap();
    let mut group = c.benchmark_group("correctors");
    group.sample_size(10);

    let (core, oracle) = planted_junta_oracle(2, 64, 0.001, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inputs: Vec<(BitVector, u64)> = (0..64)
        .map(|_| (BitVector::random(64, &mut rng), rng.random()))
        .collect();
    group.bench_function("junta_k2_n64_desk", |b| {
        let mut next = 0usize;
        b.iter_batched(
            || {
                let item = inputs[next % inputs.len()].clone();
                next += 1;
                item
            },
            |(x, seed)| {
                let mut run_rng = ChaCha8Rng::seed_from_u64(seed);
                locally_correct_junta(&core, &oracle, &x, &profile, &mut run_rng).unwrap()
            },
            BatchSize::SmallInput,
        )
    });

    let (core, oracle) = planted_psf_oracle(2, 48, 0.001, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let inputs: Vec<(BitVector, u64)> = (0..64)
        .map(|_| (BitVector::random(48, &mut rng), rng.random()))
        .collect();
    group.bench_function("psf_k2_n48_desk", |b| {
        let mut next = 0usize;
        b.iter_batched(
            || {
                let item = inputs[next % inputs.len()].clone();
                next += 1;
                item
            },
            |(x, seed)| {
                let mut run_rng = ChaCha8Rng::seed_from_u64(seed);
                locally_correct_psf(&core, &oracle, &x, &profile, &mut run_rng).unwrap()
            },
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_oracle_batch,
    bench_estimators,
    bench_exact_influence,
    bench_sampling,
    bench_correctors
);
criterion_main!(benches);
