use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavecast::network::BdLstmModel;
use wavecast::swt::{decompose_frame, dmey, DecompositionMode};
use wavecast::synthetic::{synthetic_frame, SyntheticSpec};
use wavecast::trainer::{build_features, grid_search, model_spec, Budget, HyperParams, HyperSpace, Mode, PipelineConfig};
use wavecast::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn config() -> PipelineConfig {
    PipelineConfig { mode: Mode::WtAda, lookback: 16, horizon: 2, epochs: 1, batch_size: 32, seed: 1, ..Default::default() }
}

fn batch_gradient(c: &mut Criterion) {
    let frame = synthetic_frame(&SyntheticSpec { rows: 600, seed: 1, ..Default::default() }).unwrap();
    let cfg = config();
    let set = build_features(&frame, &cfg, Execution::Sequential).unwrap();
    let hp = HyperParams { bdlstm_sizes: vec![16, 16], fc_sizes: vec![12], ..HyperParams::best_reported() };
    let spec = model_spec(&hp, set.train.num_features, cfg.horizon, &cfg.dropout);
    let model = BdLstmModel::new(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let inputs: Vec<&[f64]> = (0..64).map(|s| set.train.input(s)).collect();
    let targets: Vec<&[f64]> = (0..64).map(|s| set.train.target(s)).collect();
    let seeds: Vec<u64> = (0..64).collect();

    let mut group = c.benchmark_group("batch_gradient_64");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| model.loss_and_gradient(&inputs, &targets, Some(&seeds), exec).unwrap())
        });
    }
    group.finish();
}

fn decomposition(c: &mut Criterion) {
    let frame = synthetic_frame(&SyntheticSpec { rows: 2000, seed: 2, ..Default::default() }).unwrap();
    let filters = dmey().unwrap();
    let mut group = c.benchmark_group("decompose_frame_2000x5");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| decompose_frame(&frame, 5, DecompositionMode::Ad, &filters, exec).unwrap())
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let frame = synthetic_frame(&SyntheticSpec { rows: 300, seed: 3, ..Default::default() }).unwrap();
    let cfg = config();
    let set = build_features(&frame, &cfg, Execution::Sequential).unwrap();
    let base = HyperParams { bdlstm_sizes: vec![4], fc_sizes: vec![4], ..HyperParams::best_reported() };
    let space = HyperSpace {
        bdlstm_sizes: vec![vec![4], vec![8]],
        learning_rate: vec![1e-2, 1e-3],
        ..HyperSpace::single(&base)
    };
    let mut group = c.benchmark_group("grid_search_4_trials");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| grid_search(&set, &space, &cfg, &Budget::Full, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch_gradient, decomposition, search);
criterion_main!(benches);
