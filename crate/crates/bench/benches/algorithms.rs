use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weakadapt_bench::{config, instance, lp_rows};
use weakadapt_core::env::feasibility;
use weakadapt_core::harness::{execute, run_exp3six, Algo, RunOptions};
use weakadapt_core::{igw_distribution, DualState, Exp3SixState};

fn primal_dual_steps(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = Exp3SixState::new(16, 100_000).unwrap();
    c.bench_function("exp3six_sample_update_k16", |b| {
        b.iter(|| {
            let (a, p) = state.sample(&mut rng);
            state.update_with(a, p, black_box(0.3)).unwrap();
        })
    });

    let mut dual = DualState::new(4, 1e-3).unwrap();
    let g = [0.5, -0.25, 1.0, -1.0];
    c.bench_function("dual_step_m4", |b| {
        b.iter(|| dual.step_with(black_box(&g)).unwrap())
    });

    let lhat: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
    c.bench_function("igw_distribution_k32", |b| {
        b.iter(|| igw_distribution(black_box(&lhat), 1000.0).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let rows = lp_rows(200, 8);
    c.bench_function("epigraph_lp_200x8", |b| {
        b.iter(|| feasibility(black_box(&rows), 8).unwrap())
    });
}

fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("runs");
    group.sample_size(10);
    let spec = instance("stoch-k3m2", 10_000);
    group.bench_function("exp3six_stoch_k3m2_T10000", |b| {
        b.iter_batched(
            || config(&spec, 1),
            |cfg| run_exp3six(&spec, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let ctx = instance("contextual-d4k5m2", 2000);
    group.bench_function("contextual_d4k5m2_T2000", |b| {
        b.iter(|| execute(&ctx, Algo::Contextual, &RunOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, primal_dual_steps, solvers, full_runs);
criterion_main!(benches);
