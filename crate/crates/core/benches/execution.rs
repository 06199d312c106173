//! Sequential versus rayon execution of the three batch workloads.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion as Bench};

use sepcheck::criteria::ppt_report;
use sepcheck::oracle::{search, SearchConfig};
use sepcheck::states::{random_decomposition, separable_mixture, werner};
use sepcheck::sweep::{scan, Grid};
use sepcheck::{Criterion, Execution, Family};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn family_scan(c: &mut Bench) {
    let mut group = c.benchmark_group("scan");
    let gisin = Family::from_name("gisin", None, None).unwrap();
    for step in ["0.01", "0.001"] {
        let xs = format!("0:1:{step}").parse::<Grid>().unwrap().points();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, xs.len()), &xs, |b, xs| {
                b.iter(|| scan(&gisin, black_box(xs), &Criterion::ALL, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn separable_batch(c: &mut Bench) {
    let mut group = c.benchmark_group("separable_ppt_batch");
    let n = 200;
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, n), |b| {
            b.iter(|| {
                exec.map_indexed(n, |i| {
                    let d = random_decomposition(3, 3, 1 + i % 8, i as u64);
                    ppt_report(&separable_mixture(&d).unwrap()).unwrap().witness
                })
            })
        });
    }
    group.finish();
}

fn search_restarts(c: &mut Bench) {
    let mut group = c.benchmark_group("search_restarts");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    let rho = werner(0.9).unwrap();
    // an NPT state never succeeds, so every restart runs to its stall limit
    let cfg = SearchConfig {
        restarts: 8,
        iterations: 600,
        ..SearchConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, cfg.restarts), |b| {
            b.iter(|| search(black_box(&rho), &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, family_scan, separable_batch, search_restarts);
criterion_main!(benches);
