use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pssmp::exec::Exec;
use pssmp::rate::rate_curve;
use pssmp::sim::{estimate_lln, SimConfig, SimTarget};
use pssmp::LevyModel;

fn lln(c: &mut Criterion) {
    let target = SimTarget::Levy(LevyModel::brownian(1.0).unwrap());
    let mut g = c.benchmark_group("lln brownian t=1e4");
    g.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let cfg = SimConfig::new(1, 2000).with_exec(exec);
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &cfg,
            |b, cfg| b.iter(|| estimate_lln(&target, cfg, &[1e4]).unwrap()),
        );
    }
    g.finish();
}

fn curve(c: &mut Criterion) {
    let model = LevyModel::stable_conditioned(1.5, 1.0).unwrap();
    c.bench_function("rate curve stable 301 points", |b| {
        b.iter(|| rate_curve(&model, 0.1, 5.0, 301).unwrap())
    });
}

criterion_group!(benches, lln, curve);
criterion_main!(benches);
