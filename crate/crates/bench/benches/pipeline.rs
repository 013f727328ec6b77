use criterion::{criterion_group, criterion_main, Criterion};
use tslmi::sdp::{solve, ConicProgram};
use tslmi::{assemble_program, simulate, SimConfig, SolverOptions};
use tslmi_bench::{controller, fixture};

fn encode(c: &mut Criterion) {
    let (sys, opts) = fixture();
    c.bench_function("assemble+encode", |b| b.iter(|| ConicProgram::encode(&assemble_program(&sys, &opts).unwrap())));
}

fn solver(c: &mut Criterion) {
    let (sys, opts) = fixture();
    let cp = ConicProgram::encode(&assemble_program(&sys, &opts).unwrap());
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("ipm", |b| b.iter(|| solve(&cp, &SolverOptions::default())));
    g.finish();
}

fn closed_loop(c: &mut Criterion) {
    let (sys, ctrl) = controller();
    let cfg = SimConfig { t_end: 5.0, ..Default::default() };
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.bench_function("5s", |b| b.iter(|| simulate(&sys, Some(&ctrl), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, encode, solver, closed_loop);
criterion_main!(benches);
