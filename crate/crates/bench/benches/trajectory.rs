use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use tsallis_core::harness::run_trajectory;
use tsallis_core::{InstanceSpec, RunConfig};

fn trajectory(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectory");
    group.sample_size(20);
    let spec = InstanceSpec::bernoulli(vec![0.1, 0.3, 0.5, 0.7, 0.9]).unwrap();
    for audit in [false, true] {
        let mut config = RunConfig::new(spec.clone(), 0.5, 10_000, 1, 42);
        config.audit = audit;
        group.throughput(Throughput::Elements(config.horizon as u64));
        let label = if audit { "audited" } else { "plain" };
        group.bench_with_input(BenchmarkId::new(label, config.horizon), &config, |b, config| {
            b.iter(|| run_trajectory(black_box(config), 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trajectory);
criterion_main!(benches);
