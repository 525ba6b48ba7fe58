use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use tmuq_bench::random_bits;
use tmuq_core::{BinaryTM, Clip, Literals, Mode, TMParams};

fn trained(features: usize, clauses: usize) -> (BinaryTM, Vec<Vec<u8>>) {
    let xs: Vec<Vec<u8>> = (0..200).map(|i| random_bits(features, i)).collect();
    let ys: Vec<u8> = xs.iter().map(|x| x[0] ^ x[1]).collect();
    let mut tm = BinaryTM::new(features, TMParams::new(100, 3.9, clauses).with_seed(7).with_boost(true)).unwrap();
    tm.fit(&xs, &ys, 5, None).unwrap();
    (tm, xs)
}

fn clause_evaluation(c: &mut Criterion) {
    let (tm, xs) = trained(128, 1000);
    let lits: Vec<Literals> = xs.iter().map(|x| Literals::from_bits(x)).collect();
    c.bench_function("class_sum/128f/1000c", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % lits.len();
            black_box(tm.clipped_sum(&lits[i]))
        })
    });
    let clause = &tm.bank().clauses()[0];
    c.bench_function("clause_evaluate/128f", |b| b.iter(|| black_box(clause.evaluate(&lits[3], Mode::Infer))));
    c.bench_function("class_sum_from_bits/128f/1000c", |b| {
        b.iter(|| black_box(tm.class_sum(&xs[5], Clip::On(100)).unwrap()))
    });
}

fn train_step(c: &mut Criterion) {
    let (tm, xs) = trained(128, 1000);
    c.bench_function("train_step/128f/1000c", |b| {
        b.iter_batched_ref(
            || tm.clone(),
            |tm| tm.train_step(&xs[9], 1).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, clause_evaluation, train_step);
criterion_main!(benches);
