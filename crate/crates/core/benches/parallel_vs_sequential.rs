use std::hint::black_box;

use broadcd_core::imagery::{
    difference_magnitude_with, ImagePair, LabeledDataset, Pattern, Standardization,
};
use broadcd_core::linalg::{enhance_with, Matrix};
use broadcd_core::resample::{nearest_neighbors, smote_with};
use broadcd_core::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn matrix_products(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_matrix(&mut rng, 4096, 30);
    let w = random_matrix(&mut rng, 30, 30);
    let y = random_matrix(&mut rng, 4096, 2);
    let mut group = c.benchmark_group("matrix");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("matmul", name), &exec, |b, &e| {
            b.iter(|| black_box(x.matmul_with(&w, e).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("t_matmul", name), &exec, |b, &e| {
            b.iter(|| black_box(x.t_matmul_with(&y, e).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("enhance", name), &exec, |b, &e| {
            b.iter(|| black_box(enhance_with(&x, &w, e).unwrap()))
        });
    }
    group.finish();
}

fn difference_image(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (w, h) = (256, 256);
    let mut raster = || {
        (0..w * h * 3)
            .map(|_| rng.random::<u8>())
            .collect::<Vec<u8>>()
    };
    let pair = ImagePair::new(w, h, raster(), raster()).unwrap();
    let mut group = c.benchmark_group("imagery");
    for (name, exec) in MODES {
        group.bench_with_input(
            BenchmarkId::new("difference_magnitude", name),
            &exec,
            |b, &e| b.iter(|| black_box(difference_magnitude_with(&pair, e))),
        );
    }
    group.finish();
}

fn resampling(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<Pattern> = (0..1500)
        .map(|_| std::array::from_fn(|_| rng.random_range(0.0..10.0)))
        .collect();
    let labels = (0..points.len()).map(|i| u8::from(i < 500)).collect();
    let data = LabeledDataset::new(points.clone(), labels, None).unwrap();
    let scale = Standardization::fit(&points).unwrap().std;
    let mut group = c.benchmark_group("resample");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(
            BenchmarkId::new("nearest_neighbors", name),
            &exec,
            |b, &e| b.iter(|| black_box(nearest_neighbors(&points[..500], 5, &scale, e))),
        );
        group.bench_with_input(BenchmarkId::new("smote", name), &exec, |b, &e| {
            b.iter(|| black_box(smote_with(&data, 1, 1000, 5, 7, e).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, matrix_products, difference_image, resampling);
criterion_main!(benches);
