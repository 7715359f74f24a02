//! Parallel vs sequential throughput of the experiment drivers.
//!
//! With the `parallel` feature each workload runs twice: on a one-thread
//! rayon pool (the sequential baseline) and on the default pool. Without the
//! feature only the sequential path exists and is measured on its own.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ricci_core::experiments::{conservation_study, measure_inequalities, ExperimentSpec};
use ricci_core::flow::Integrator;

fn inequality_spec() -> ExperimentSpec {
    ExperimentSpec {
        resolution: 32,
        samples: 64,
        trajectory_samples: 4,
        band_limit: 4,
        initial_amplitude: 0.5,
        ..ExperimentSpec::default()
    }
}

fn ladder_spec() -> ExperimentSpec {
    ExperimentSpec {
        resolution: 32,
        t_end: 0.1,
        dt_levels: vec![0.02, 0.01, 0.005, 0.0025],
        integrator: Integrator::Imex4,
        ..ExperimentSpec::default()
    }
}

type Workload = (&'static str, Box<dyn Fn() + Sync>);

fn workloads() -> Vec<Workload> {
    let ineq = inequality_spec();
    let surface = ineq.build_surface().unwrap();
    let ladder = ladder_spec();
    vec![
        (
            "inequality_samples",
            Box::new(move || {
                measure_inequalities(&ineq, &surface).unwrap();
            }),
        ),
        (
            "dt_ladder",
            Box::new(move || {
                conservation_study(&ladder).unwrap();
            }),
        ),
    ]
}

#[cfg(feature = "parallel")]
fn bench(c: &mut Criterion) {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let threads = rayon::current_num_threads();
    let mut group = c.benchmark_group("drivers");
    group.sample_size(10);
    for (name, work) in workloads() {
        group.bench_function(BenchmarkId::new("sequential", name), |b| {
            b.iter(|| single.install(&work))
        });
        group.bench_function(BenchmarkId::new(format!("parallel_{threads}"), name), |b| {
            b.iter(&work)
        });
    }
    group.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("drivers");
    group.sample_size(10);
    for (name, work) in workloads() {
        group.bench_function(BenchmarkId::new("sequential", name), |b| b.iter(&work));
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
