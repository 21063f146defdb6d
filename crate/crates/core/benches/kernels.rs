//! Spectral kernels on the global rayon pool against a one-thread pool.
//! Build with `--no-default-features` for the fully sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nslimit_core::calculus::paraproduct;
use nslimit_core::littlewood_paley::build_partition;
use nslimit_core::solvers::{CnsStepper, FlowState, PhysicalParams};
use nslimit_core::spectral::random::{random_field, RandomSpec};
use nslimit_core::spectral::{forward_transform, inverse_transform, product_dealiased, Grid, Rank};
use rayon::ThreadPool;

fn pools() -> Vec<(&'static str, Option<ThreadPool>)> {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("rayon", None), ("one_thread", Some(single))]
}

fn on<R: Send>(pool: &Option<ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn kernels(c: &mut Criterion) {
    let spec = RandomSpec::default();
    for (d, n) in [(2, 128), (3, 32)] {
        let g = Grid::new(d, n).unwrap();
        let b = build_partition(&g);
        let u = random_field(&g, Rank::Scalar, 1, &spec);
        let v = random_field(&g, Rank::Scalar, 2, &spec);
        let w = random_field(&g, Rank::Vector, 3, &spec);
        let samples = inverse_transform(&u).remove(0);
        let params = PhysicalParams::with_nu(1.0, 40.0, 2.0).unwrap();
        let state = FlowState::new(u.scale(0.1), w.clone(), 0.0).unwrap();
        let tag = format!("d{d}_n{n}");

        let mut group = c.benchmark_group(format!("kernels_{tag}"));
        group.sample_size(10);
        for (name, pool) in pools() {
            group.bench_function(BenchmarkId::new("transform_round_trip", name), |bch| {
                bch.iter(|| on(&pool, || inverse_transform(&forward_transform(&g, &samples).unwrap())))
            });
            group.bench_function(BenchmarkId::new("product_dealiased", name), |bch| {
                bch.iter(|| on(&pool, || product_dealiased(&u, &v).unwrap()))
            });
            group.bench_function(BenchmarkId::new("band_norms_p3", name), |bch| {
                bch.iter(|| on(&pool, || b.band_norms(&w, 3.0).unwrap()))
            });
            group.bench_function(BenchmarkId::new("paraproduct", name), |bch| {
                bch.iter(|| on(&pool, || paraproduct(&u, &v, &b).unwrap()))
            });
            let mut stepper = CnsStepper::new(&g, params);
            group.bench_function(BenchmarkId::new("cns_step", name), |bch| {
                bch.iter(|| on(&pool, || stepper.step(&state, 1e-3).unwrap()))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, kernels);
criterion_main!(benches);
