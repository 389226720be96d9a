use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fkest::graph::fixtures::{cycle, gnp, random_equipartition};
use fkest::rng::seeded;
use fkest::{d_box, fk_star_irregularity, ind_induced, max_index, WeightedGraph};
use rand::Rng;

fn weighted(n: usize, seed: u64) -> WeightedGraph {
    let mut rng = seeded(seed);
    WeightedGraph::from_fn(n, |_, _| rng.gen()).unwrap()
}

fn bench_d_box(c: &mut Criterion) {
    let mut group = c.benchmark_group("d_box");
    for n in [6, 8, 10] {
        let (r, rp) = (weighted(n, 1), weighted(n, 2));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| d_box(&r, &rp).unwrap()));
    }
    group.finish();
}

fn bench_ind(c: &mut Criterion) {
    let mut group = c.benchmark_group("ind_induced");
    let f = cycle(4);
    for n in [6, 10, 14] {
        let r = weighted(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| ind_induced(&f, &r)));
    }
    group.finish();
}

fn bench_max_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_index");
    group.sample_size(10);
    for (n, s) in [(8, 2), (9, 3), (10, 2)] {
        let g = gnp(n, 0.5, &mut seeded(4));
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), s), &s, |b, &s| b.iter(|| max_index(&g, s).unwrap()));
    }
    group.finish();
}

fn bench_fk_star(c: &mut Criterion) {
    let mut group = c.benchmark_group("fk_star");
    group.sample_size(10);
    for n in [10, 12, 14] {
        let mut rng = seeded(5);
        let g = gnp(n, 0.5, &mut rng);
        let a = random_equipartition(n, 2, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| fk_star_irregularity(&g, &a).unwrap()));
    }
    group.finish();
}

criterion_group!(kernels, bench_d_box, bench_ind, bench_max_index, bench_fk_star);
criterion_main!(kernels);
