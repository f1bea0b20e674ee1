use std::hint::black_box;

use admg_learn::evaluation::verma_dataset;
use admg_learn::penalty::greenery;
use admg_learn::ricf::default_init;
use admg_learn::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn weighted(d: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_admg(d, 0.3, 0.2, GraphClass::BowFree, &mut rng).expect("graph");
    let p = random_parameters(&g, &mut rng).expect("params");
    let dm = p.delta().map(|x| x * x);
    let bm = DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { p.beta()[(i, j)].powi(2) });
    (dm, bm)
}

fn penalties(c: &mut Criterion) {
    let mut group = c.benchmark_group("penalty");
    for &d in &[5usize, 10, 20] {
        let (dm, bm) = weighted(d, d as u64);
        for (name, mode) in [("power", PenaltyMode::MatrixPower), ("exp", PenaltyMode::MatrixExponential)] {
            let cfg = PenaltyConfig { mode, ..PenaltyConfig::default() };
            for class in [GraphClass::Ancestral, GraphClass::Arid, GraphClass::BowFree] {
                let id = BenchmarkId::new(format!("{}/{name}", class.as_str()), d);
                group.bench_with_input(id, &d, |b, _| {
                    b.iter(|| admg_learn::penalty::graph_penalty(black_box(&dm), black_box(&bm), class, &cfg).unwrap())
                });
            }
        }
        let cfg = PenaltyConfig::default();
        group.bench_with_input(BenchmarkId::new("greenery", d), &d, |b, _| {
            b.iter(|| greenery(black_box(&dm), black_box(&bm), &cfg).unwrap())
        });
    }
    group.finish();
}

fn ricf(c: &mut Criterion) {
    let (_, data) = verma_dataset(1000, 0).expect("data");
    let init = default_init(&data);
    let cfg = RicfConfig { max_iterations: 50, class: Some(GraphClass::BowFree), ..RicfConfig::default() };
    c.bench_function("ricf/verma_d4_50it", |b| b.iter(|| regularized_ricf(black_box(&data), &init, &cfg).unwrap()));
}

fn discovery(c: &mut Criterion) {
    let (_, data) = verma_dataset(1000, 0).expect("data");
    let mut group = c.benchmark_group("discover");
    group.sample_size(10);
    for class in [GraphClass::Ancestral, GraphClass::BowFree] {
        let hp = Hyperparams { restarts: 1, ..Hyperparams::new(class) };
        group.bench_function(format!("verma_d4/{}", class.as_str()), |b| b.iter(|| discover(black_box(&data), &hp).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, penalties, ricf, discovery);
criterion_main!(benches);
