use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use katofan_core::abelian::{batch_cokernels, GroupHom, IntMatrix};
use katofan_core::corpus::{corpus, get};
use katofan_core::groupoid::{all_tuples, build_truncation, facelem_sweep, PMonoid};
use katofan_core::monoid::{Element, DEFAULT_BOUND};
use katofan_core::par::Exec;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn random_maps(count: usize) -> Vec<GroupHom> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count)
        .map(|_| {
            let rows: Vec<Vec<i64>> = (0..4)
                .map(|_| (0..4).map(|_| rng.random_range(-5..=5)).collect())
                .collect();
            GroupHom::free(IntMatrix::from_rows(&rows))
        })
        .collect()
}

fn cokernels(c: &mut Criterion) {
    let maps = random_maps(2000);
    let mut group = c.benchmark_group("cokernels");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, maps.len()), &maps, |b, maps| {
            b.iter(|| batch_cokernels(black_box(maps), exec))
        });
    }
    group.finish();
}

fn membership(c: &mut Criterion) {
    let m = get("C3").unwrap();
    let points: Vec<Element> = (-8..=8)
        .flat_map(|x| (-8..=8).map(move |y| vec![BigInt::from(x), BigInt::from(y)]))
        .collect();
    let mut group = c.benchmark_group("membership");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, points.len()), &points, |b, pts| {
            b.iter(|| m.membership_batch(black_box(pts), DEFAULT_BOUND, exec))
        });
    }
    group.finish();
}

fn facelem(c: &mut Criterion) {
    let monoids: Vec<PMonoid> = corpus()
        .iter()
        .map(|(_, m)| PMonoid::over_trivial(m))
        .collect();
    let cases: Vec<(Vec<PMonoid>, usize)> = all_tuples(monoids.len(), 2)
        .into_iter()
        .flat_map(|t| {
            let tuple: Vec<PMonoid> = t.iter().map(|&i| monoids[i].clone()).collect();
            (0..2).map(move |s| (tuple.clone(), s))
        })
        .collect();
    let mut group = c.benchmark_group("facelem");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, cases.len()), &cases, |b, cases| {
            b.iter(|| facelem_sweep(black_box(cases), exec))
        });
    }
    group.finish();
}

fn truncation(c: &mut Criterion) {
    let charts: Vec<PMonoid> = ["N", "N2"]
        .iter()
        .map(|n| PMonoid::over_trivial(&get(n).unwrap()))
        .collect();
    let mut group = c.benchmark_group("truncation");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| build_truncation(black_box(&charts), 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, cokernels, membership, facelem, truncation);
criterion_main!(benches);
