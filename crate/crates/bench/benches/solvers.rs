use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use scad_amp::amp::amp_step;
use scad_amp::cd::{cd_sweep, column_norms, CdState};
use scad_amp::*;
use scad_amp_bench::{half_instance, rs_params};
use std::hint::black_box;

fn amp(c: &mut Criterion) {
    let p = rs_params();
    let mut g = c.benchmark_group("amp");
    for n in [200, 1000] {
        let inst = half_instance(n, 1);
        let opts = AmpOptions::default();
        let state = AmpState::cold(&inst);
        g.bench_with_input(BenchmarkId::new("step", n), &n, |b, _| {
            b.iter(|| amp_step(black_box(&state), &inst, &p, &opts).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("solve", n), &n, |b, _| {
            b.iter(|| run_amp(black_box(&inst), &p, &opts).unwrap())
        });
    }
    g.finish();
}

fn macroscopic(c: &mut Criterion) {
    let p = rs_params();
    c.bench_function("de_fixed_point", |b| {
        b.iter(|| de_fixed_point(black_box(0.5), 1.0, &p, &DeOptions::default()).unwrap())
    });
    c.bench_function("rs_saddle_solve", |b| {
        b.iter(|| rs_saddle_solve(black_box(0.5), 1.0, &p, &SaddleOptions::default()).unwrap())
    });
    c.bench_function("phase_boundary", |b| {
        b.iter(|| phase_boundary(black_box(0.5), 1.0, 1.0, (1.001, 1e3), 1e-4).unwrap())
    });
}

fn coordinate_descent(c: &mut Criterion) {
    let p = rs_params();
    let mut g = c.benchmark_group("cd");
    for n in [200, 1000] {
        let inst = half_instance(n, 2);
        let norms = column_norms(&inst);
        g.bench_with_input(BenchmarkId::new("sweep", n), &n, |b, &n| {
            b.iter_batched(
                || CdState::new(&inst, DVector::zeros(n)).unwrap(),
                |mut s| cd_sweep(&mut s, &inst, &p, &norms, 0..n),
                criterion::BatchSize::SmallInput,
            )
        });
        g.bench_with_input(BenchmarkId::new("solve", n), &n, |b, &n| {
            b.iter(|| run_cd(&inst, &p, DVector::zeros(n), &CdOptions::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, amp, macroscopic, coordinate_descent);
criterion_main!(benches);
