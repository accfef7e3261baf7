use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pegsearch::environment::{make_wall, GeometryRanges, StateVariant};
use pegsearch::harness::{evaluate, EvalSettings};
use pegsearch::neuralnet::{init_network, AdamState, Checkpoint, TrainingMeta};
use pegsearch::parallel::Execution;

fn bench_evaluation(c: &mut Criterion) {
    let network = init_network(1);
    let adam = AdamState::for_network(&network, 0.001);
    let checkpoint = Checkpoint {
        network,
        adam,
        meta: TrainingMeta { episodes: 0, seed: 1, variant: StateVariant::S1 },
    };
    let wall = make_wall(13, 1, &GeometryRanges::default()).unwrap();
    let holes: Vec<usize> = (2..=13).collect();
    let starts: Vec<usize> = (1..=8).collect();

    let mut group = c.benchmark_group("evaluate_12x8x100");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let settings = EvalSettings { episodes_per_cell: 100, execution: exec, ..EvalSettings::default() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &settings, |b, s| {
            b.iter(|| evaluate(&checkpoint, &wall, &holes, &starts, StateVariant::S1, s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_evaluation);
criterion_main!(benches);
