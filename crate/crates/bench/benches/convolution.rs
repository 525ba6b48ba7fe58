use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use tmuq_bench::random_image;
use tmuq_core::conv::patch_literals;
use tmuq_core::{ConvolutionalTM, PatchConfig, TMParams};

fn conv(c: &mut Criterion) {
    let images: Vec<_> = (0..8).map(|s| random_image(8, s)).collect();
    let config = PatchConfig::new((32, 32, 24), (3, 3));
    let classes = vec!["a".to_string(), "b".to_string()];
    let params = TMParams::new(2000, 10.0, 200).with_boost(true).with_literal_budget(64).with_seed(1);
    let mut tm = ConvolutionalTM::new(config, classes, params).unwrap();
    tm.fit(&images, &[0, 1, 0, 1, 0, 1, 0, 1], 2).unwrap();

    c.bench_function("patch_literals/32x32x24", |b| b.iter(|| black_box(patch_literals(&images[0], &config).unwrap())));
    let patches = tm.patches(&images[1]).unwrap();
    c.bench_function("conv_class_sums/200c/900p", |b| b.iter(|| black_box(tm.class_sums_patches(&patches))));
    let mut group = c.benchmark_group("conv_train");
    group.sample_size(20);
    group.bench_function("train_step/200c/900p", |b| {
        b.iter_batched_ref(|| tm.clone(), |tm| tm.train_step(&images[2], 0).unwrap(), BatchSize::LargeInput)
    });
    group.finish();
}

criterion_group!(benches, conv);
criterion_main!(benches);
