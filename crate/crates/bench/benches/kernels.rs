use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use headfit::basis::{fit_pca, BasisRanks};
use headfit::fit::{fit, FitConfig, FitTargets};
use headfit::geometry::Vec2;
use headfit::loss::chamfer2d_loss_grad;
use headfit::raster::{rasterize_soft, rasterize_soft_grad, ImageSize};
use headfit::synth::{synth_head, SynthConfig};

fn raster(c: &mut Criterion) {
    let head = synth_head(0, &SynthConfig::default()).unwrap();
    let mut group = c.benchmark_group("raster");
    for side in [64, 128] {
        let size = ImageSize::square(side).unwrap();
        let cfg = SynthConfig::default().raster;
        group.bench_with_input(BenchmarkId::new("forward", side), &size, |b, &size| {
            b.iter(|| rasterize_soft(&head.template, black_box(&head.deformed), &head.camera, &cfg, size).unwrap())
        });
        let up = vec![1.0; size.pixel_count()];
        group.bench_with_input(BenchmarkId::new("forward_backward", side), &size, |b, &size| {
            b.iter(|| rasterize_soft_grad(&head.template, black_box(&head.deformed), &head.camera, &cfg, size, &up).unwrap())
        });
    }
    group.finish();
}

fn chamfer(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("chamfer2d");
    for n in [256, 1024] {
        let p: Vec<Vec2> = (0..n).map(|_| Vec2::new(rng.random(), rng.random())).collect();
        let s: Vec<Vec2> = (0..n).map(|_| Vec2::new(rng.random(), rng.random())).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| chamfer2d_loss_grad(black_box(&p), &s).unwrap()));
    }
    group.finish();
}

fn pca(c: &mut Criterion) {
    let head = synth_head(0, &SynthConfig::default()).unwrap();
    let regions = head.template.regions().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = DMatrix::from_fn(3 * regions.len(), 24, |_, _| rng.random_range(-1.0..1.0));
    let ranks = BasisRanks { hair: 10, neck: 4 };
    c.bench_function("fit_pca_642x24", |b| b.iter(|| fit_pca(black_box(&data), ranks, &regions, true).unwrap()));
}

fn fit_steps(c: &mut Criterion) {
    let head = synth_head(0, &SynthConfig::default()).unwrap();
    let config = FitConfig { iterations: 5, ..FitConfig::default() };
    let targets = FitTargets { full: &head.target_full, hair: &head.target_hair };
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("five_steps_128px", |b| {
        b.iter(|| fit(&head.template, &head.model, &head.params, targets, &head.camera, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, raster, chamfer, pca, fit_steps);
criterion_main!(benches);
