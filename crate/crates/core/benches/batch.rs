use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use walker_core::fuzzy::user5_profile;
use walker_core::sim::batch::matched_specs;
use walker_core::sim::{run_batch, Direction, Execution, Scenario, TrialConfig};

fn batch(c: &mut Criterion) {
    let scenarios = [
        Scenario::straight_5m(),
        Scenario::course_4m_90(Direction::Left),
        Scenario::course_4m_90(Direction::Right),
    ];
    let cfg = TrialConfig::default();
    let mut group = c.benchmark_group("batch");
    group.sample_size(10);
    for seeds in [1u64, 4] {
        let specs = matched_specs(&scenarios, 0..seeds);
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, specs.len()), &specs, |b, s| {
                b.iter(|| run_batch(black_box(s), &cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn inference(c: &mut Criterion) {
    let p = user5_profile();
    c.bench_function("infer_grid_50x50", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..50 {
                for j in 0..50 {
                    let a = 60.0 * i as f64 / 49.0;
                    let t = -10.0 + 20.0 * j as f64 / 49.0;
                    acc += p.infer(black_box(a), black_box(t));
                }
            }
            acc
        })
    });
}

criterion_group!(benches, batch, inference);
criterion_main!(benches);
