use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use blid_bench::{
    dense_cubic, element, factorial_realization, geometric_extension, pointwise, scaled,
    spread_auto, taylor,
};
use blid_core::cohomology::solve_order;
use blid_core::{FrechetMetric, SpaceKind};

fn blid_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("blid_apply");
    let x0 = element(0, 11);
    let x3 = element(3, 12);
    let x5 = element(5, 13);

    let p = pointwise();
    group.bench_function("pointwise_n1025", |b| {
        b.iter(|| p.apply(black_box(&x0)).unwrap())
    });

    let t = taylor(3);
    group.bench_function("taylor_k3_n1025", |b| {
        b.iter(|| t.apply(black_box(&x3)).unwrap())
    });

    let s = scaled(0.1);
    group.bench_function("scaled_c0.1_n1025", |b| {
        b.iter(|| s.apply(black_box(&x5)).unwrap())
    });
    group.finish();
}

fn metric_distance(c: &mut Criterion) {
    let metric = FrechetMetric::new(SpaceKind::CinfInterval, 12).unwrap();
    let x = element(3, 21);
    let y = element(3, 22);
    c.bench_function("frechet_distance_k12_n1025", |b| {
        b.iter(|| metric.distance(black_box(&x), black_box(&y)).unwrap())
    });
}

fn germ_extension_eval(c: &mut Criterion) {
    let map = geometric_extension();
    let x = element(0, 31);
    c.bench_function("geometric_extension_eval_n1025", |b| {
        b.iter(|| map.eval(black_box(&x)).unwrap())
    });
}

fn jet_realization_eval(c: &mut Criterion) {
    let realization = factorial_realization();
    c.bench_function("jet_realization_eval_deg5", |b| {
        b.iter(|| realization.eval(black_box(&[0.37])).unwrap())
    });
}

fn conjugacy_solve(c: &mut Criterion) {
    let auto = spread_auto();
    let p = dense_cubic();
    c.bench_function("conjugacy_solve_d3_deg3", |b| {
        b.iter(|| solve_order(black_box(&auto), 3, black_box(&p)).unwrap())
    });
}

criterion_group!(
    benches,
    blid_apply,
    metric_distance,
    germ_extension_eval,
    jet_realization_eval,
    conjugacy_solve
);
criterion_main!(benches);
