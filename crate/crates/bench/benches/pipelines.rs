use criterion::{black_box, criterion_group, criterion_main, Criterion};

use strainreal_core::expr::parse_expression;
use strainreal_core::field::Matrix2;
use strainreal_core::local::{assemble_local_realization, LocalRealizeConfig};
use strainreal_core::wave::{solve_wave, sweep_system, SweepConfig};
use strainreal_core::{laminate, Var};

fn bench_symbolic(c: &mut Criterion) {
    let u = parse_expression("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)").unwrap();
    c.bench_function("fifth_derivative", |b| {
        b.iter(|| black_box(u.differentiate(Var::X, 5)))
    });
    let d5 = u.differentiate(Var::X, 5);
    c.bench_function("eval_fifth_derivative", |b| {
        b.iter(|| black_box(d5.eval(0.37, -0.21)))
    });
}

fn bench_local(c: &mut Criterion) {
    let u = parse_expression("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)").unwrap();
    let cfg = LocalRealizeConfig {
        nx: 17,
        ..Default::default()
    };
    let mut group = c.benchmark_group("local");
    group.sample_size(10);
    group.bench_function("assemble_nx17", |b| {
        b.iter(|| black_box(assemble_local_realization(&u, &cfg).unwrap()))
    });
    group.finish();
}

fn bench_leapfrog(c: &mut Criterion) {
    let cfg = SweepConfig {
        b0: 0.5,
        t_max: 2.0,
        z_max: 4.0,
        dz: 1.0 / 32.0,
    };
    let sys = sweep_system(0.5, &cfg);
    let mut group = c.benchmark_group("wave");
    group.sample_size(20);
    group.bench_function("leapfrog_march", |b| b.iter(|| black_box(solve_wave(&sys))));
    group.finish();
}

fn bench_laminate(c: &mut Criterion) {
    let e1 = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let e2 = Matrix2::new(0.0, 2.0, 2.0, 0.0);
    c.bench_function("laminate_batch_1000", |b| {
        b.iter(|| {
            let mut acc = 0usize;
            for k in 0..1000 {
                let th = k as f64 * 0.006283;
                let xi = (th.cos(), th.sin());
                if laminate::brute_force_realizable(&e1, &e2, xi, 121) {
                    acc += 1;
                }
            }
            black_box(acc)
        })
    });
}

criterion_group!(
    benches,
    bench_symbolic,
    bench_local,
    bench_leapfrog,
    bench_laminate
);
criterion_main!(benches);
