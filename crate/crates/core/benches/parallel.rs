//! Default rayon pool against a single-thread pool on the heavier workloads.
//! Building without the `parallel` feature gives the plain sequential path:
//! `cargo bench --no-default-features`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use aec::axioms::GlobalConfig;
use aec::construct::{terminal_fragment, DEFAULT_BUDGET};
use aec::generate::{random_config, Profile};
use aec::harness::{run_law, Law};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", one), ("pool", all)]
}

fn workloads(c: &mut Criterion) {
    let profile = Profile::default();
    let big = terminal_fragment(6);
    let configs: Vec<_> = (0..20).map(|s| random_config(s, &profile).unwrap()).collect();
    let mut group = c.benchmark_group("parallel");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("validate-terminal-6", name), |b| {
            b.iter(|| pool.install(|| black_box(big.validate())))
        });
        group.bench_function(BenchmarkId::new("pullbacks-20", name), |b| {
            b.iter(|| {
                pool.install(|| {
                    for cfg in &configs {
                        black_box(GlobalConfig::new(cfg.clone(), DEFAULT_BUDGET).unwrap());
                    }
                })
            })
        });
        group.bench_function(BenchmarkId::new("harness-trp-cip-50", name), |b| {
            b.iter(|| pool.install(|| black_box(run_law(Law::TrpCip, 0, 50, &profile, DEFAULT_BUDGET).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, workloads);
criterion_main!(benches);
