use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ilc_core::experiment::{self, RunConfig};
use ilc_core::ilc::{self, RunOptions};
use ilc_core::par::Execution;
use ilc_core::scenario::builtin;

fn sweep(c: &mut Criterion) {
    let s = builtin::by_name("example1").unwrap();
    let case = s.case("a").unwrap();
    let (yd, u0) = (s.trajectory(case), s.u0_signal(case));
    let betas = [(0.0, 0.0), (0.0, 0.05), (0.0, 0.1), (0.0, 0.2)];
    let mut group = c.benchmark_group("robustness_sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let r = ilc::robustness_sweep(s.plant(), s.gain(), &yd, &u0, 20, &betas, 1, &RunOptions::default(), exec);
                black_box(r.unwrap().len())
            })
        });
    }
    group.finish();
}

fn cases(c: &mut Criterion) {
    let s = builtin::by_name("example2").unwrap();
    let names: Vec<String> = s.cases().iter().map(|c| c.name.clone()).collect();
    let config = RunConfig { iterations: Some(40), seed: None };
    let mut group = c.benchmark_group("run_cases");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| black_box(experiment::run_cases(&s, &names, &config, exec).len())));
    }
    group.finish();
}

criterion_group!(benches, sweep, cases);
criterion_main!(benches);
