use std::hint::black_box;

use bratteli_core::absorption::DemoOptions;
use bratteli_core::fixtures::{complete, odo2};
use bratteli_core::gen::Gen;
use bratteli_core::{diagram_from_filtration, telescope, two_point_demo};
use criterion::{criterion_group, criterion_main, Criterion};

fn counting(c: &mut Criterion) {
    let d = complete(4, 3, 40);
    c.bench_function("count_paths complete(4,3,40)", |b| b.iter(|| black_box(&d).count_paths(40).unwrap()));
}

fn transforms(c: &mut Criterion) {
    let d = odo2(64);
    let cuts: Vec<usize> = (0..=64).step_by(4).collect();
    c.bench_function("telescope odo2(64) every 4th", |b| b.iter(|| telescope(black_box(&d), &cuts).unwrap()));
    let chain = Gen::new(7).chain(12, 4);
    c.bench_function("compile chain 12 points", |b| b.iter(|| diagram_from_filtration(black_box(&chain)).unwrap()));
}

fn demo(c: &mut Criterion) {
    let mut g = c.benchmark_group("demo");
    g.sample_size(10);
    g.bench_function("two-point depth 4", |b| b.iter(|| two_point_demo(&DemoOptions::new(4)).unwrap()));
    g.finish();
}

criterion_group!(benches, counting, transforms, demo);
criterion_main!(benches);
