//! Deterministic synthetic fixtures: random models and the head proxy.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec3;
use crate::model::SkinnedBlendshapeModel;

mod head;

pub use head::{head_model, head_template, region_of_direction, synth_head, HeadProxy, SynthConfig};

/// Random model with `joint_count` joints arranged in a chain.
///
/// Bases are dense Gaussian-like, regressor and skin weights are random
/// probability vectors.
pub fn random_model(
    seed: u64,
    vertex_count: usize,
    shape_dim: usize,
    expr_dim: usize,
    joint_count: usize,
) -> SkinnedBlendshapeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = vertex_count;
    let v_base: Vec<Vec3> = (0..n)
        .map(|_| {
            Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let shape = DMatrix::from_fn(3 * n, shape_dim, |_, _| rng.random_range(-0.1..0.1));
    let expr = DMatrix::from_fn(3 * n, expr_dim, |_, _| rng.random_range(-0.1..0.1));
    let regressor = random_stochastic(&mut rng, joint_count, n);
    let weights = random_stochastic(&mut rng, n, joint_count);
    let parents = (0..joint_count).map(|k| k.checked_sub(1)).collect();
    SkinnedBlendshapeModel::new(v_base, shape, expr, regressor, weights, parents)
        .expect("random model is valid")
}

fn random_stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(0.05..1.0));
    for mut row in m.row_iter_mut() {
        let sum: f64 = row.iter().sum();
        row /= sum;
    }
    m
}
