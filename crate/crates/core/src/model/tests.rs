use super::*;
use crate::gradcheck::{assert_gradients_match, central_difference};
use crate::synth::random_model;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_params(model: &SkinnedBlendshapeModel, seed: u64, angle: f64) -> PoseParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PoseParams {
        shape: (0..model.shape_dim()).map(|_| rng.random_range(-2.0..2.0)).collect(),
        expression: (0..model.expression_dim()).map(|_| rng.random_range(-2.0..2.0)).collect(),
        rotations: (0..model.joint_count())
            .map(|_| [0; 3].map(|_| angle * rng.random_range(-1.0..1.0)))
            .collect(),
    }
}

#[allow(clippy::needless_range_loop)]
fn blend_oracle(model: &SkinnedBlendshapeModel, shape: &[f64], expr: &[f64]) -> Vec<Vec3> {
    let n = model.vertex_count();
    let mut out = model.v_base().to_vec();
    for i in 0..n {
        for c in 0..3 {
            for (k, s) in shape.iter().enumerate() {
                out[i][c] += model.shape_basis()[(3 * i + c, k)] * s;
            }
            for (l, e) in expr.iter().enumerate() {
                out[i][c] += model.expr_basis()[(3 * i + c, l)] * e;
            }
        }
    }
    out
}

#[test]
fn zero_coefficients_give_base() {
    let model = random_model(1, 20, 4, 3, 2);
    let params = PoseParams::zeros(&model);
    assert_eq!(model.blend(&params.shape, &params.expression).unwrap(), model.v_base());
    assert_eq!(model.reconstruct(&params).unwrap(), model.v_base());
}

#[test]
fn single_blendshape_translates_along_x() {
    let base = vec![Vec3::new(0.0, 1.0, 2.0), Vec3::new(-1.0, 0.5, 0.0)];
    let mut b = DMatrix::zeros(6, 1);
    b[(0, 0)] = 1.0;
    b[(3, 0)] = 1.0;
    let rigid = SkinnedBlendshapeModel::rigid(base.clone());
    let model = SkinnedBlendshapeModel::new(
        base.clone(),
        b,
        DMatrix::zeros(6, 0),
        rigid.joint_regressor().clone(),
        rigid.skin_weights().clone(),
        vec![None],
    )
    .unwrap();
    let out = model.blend(&[2.0], &[]).unwrap();
    for (o, v) in out.iter().zip(&base) {
        assert_eq!(*o, v + Vec3::new(2.0, 0.0, 0.0));
    }
}

#[test]
fn blend_matches_triple_loop_seed_3() {
    let model = random_model(3, 30, 5, 4, 3);
    let p = random_params(&model, 3, 0.0);
    let got = model.blend(&p.shape, &p.expression).unwrap();
    for (a, b) in got.iter().zip(blend_oracle(&model, &p.shape, &p.expression)) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn blend_dimension_mismatch() {
    let model = random_model(3, 10, 2, 2, 1);
    assert!(matches!(
        model.blend(&[1.0], &[0.0, 0.0]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn zero_rotation_skinning_is_identity() {
    let model = random_model(4, 25, 3, 3, 4);
    let p = random_params(&model, 4, 0.0);
    let blended = model.blend(&p.shape, &p.expression).unwrap();
    assert_eq!(model.skin(&blended, &p.rotations).unwrap(), blended);
}

#[test]
fn half_turn_about_origin_joint() {
    let verts = vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.0, 0.5), Vec3::new(0.0, -2.0, -3.5)];
    // regressor averages to the origin
    let model = SkinnedBlendshapeModel::rigid(verts.clone());
    let out = model.skin(&verts, &[[0.0, 0.0, PI]]).unwrap();
    for (o, v) in out.iter().zip(&verts) {
        assert!((o - Vec3::new(-v[0], -v[1], v[2])).norm() < 1e-12);
    }
}

#[test]
fn two_joint_chain_matches_explicit_composition_seed_5() {
    let model = random_model(5, 40, 2, 2, 2);
    let p = random_params(&model, 5, 1.0);
    let blended = model.blend(&p.shape, &p.expression).unwrap();
    let got = model.skin(&blended, &p.rotations).unwrap();

    let j = model.joints(&blended).unwrap();
    let r0 = nalgebra::Rotation3::new(Vec3::from(p.rotations[0]));
    let r1 = nalgebra::Rotation3::new(Vec3::from(p.rotations[1]));
    let t0 = |x: Vec3| r0 * (x - j[0]) + j[0];
    let t1 = |x: Vec3| t0(r1 * (x - j[1]) + j[1]);
    for (i, v) in blended.iter().enumerate() {
        let w = model.skin_weights().row(i);
        let expect = w[0] * t0(*v) + w[1] * t1(*v);
        assert!((got[i] - expect).norm() < 1e-12);
    }
}

#[test]
fn reconstruct_is_blend_then_skin_seed_9() {
    let model = random_model(9, 30, 3, 3, 3);
    let p = random_params(&model, 9, 0.8);
    let blended = blend_oracle(&model, &p.shape, &p.expression);
    let expect = model.skin(&blended, &p.rotations).unwrap();
    let got = model.reconstruct(&p).unwrap();
    for (a, b) in got.iter().zip(&expect) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn expression_only_change_without_pose() {
    let model = random_model(2, 15, 2, 3, 2);
    let mut p = PoseParams::zeros(&model);
    p.expression = vec![0.5, -1.0, 2.0];
    let got = model.reconstruct(&p).unwrap();
    let expect = blend_oracle(&model, &[0.0, 0.0], &p.expression);
    for (a, b) in got.iter().zip(&expect) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn blend_is_linear() {
    let model = random_model(6, 20, 3, 2, 1);
    let psi = [0.3, -0.7];
    let (a, b) = ([1.0, -0.5, 2.0], [-0.2, 0.9, 0.4]);
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let lhs = model.blend(&sum, &psi).unwrap();
    let base_psi = model.blend(&[0.0; 3], &psi).unwrap();
    let da = model.blend(&a, &[0.0; 2]).unwrap();
    let db = model.blend(&b, &[0.0; 2]).unwrap();
    for i in 0..20 {
        let left = lhs[i] - base_psi[i];
        let right = (da[i] - model.v_base()[i]) + (db[i] - model.v_base()[i]);
        assert!((left - right).norm() < 1e-9);
    }
}

#[test]
fn vertex_relabeling_permutes_output() {
    let model = random_model(8, 12, 2, 2, 2);
    let p = random_params(&model, 8, 0.7);
    let perm: Vec<usize> = (0..12).map(|i| (i * 5) % 12).collect();
    let permute_rows3 = |m: &DMatrix<f64>| {
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(3 * perm[r / 3] + r % 3, c)])
    };
    let permuted = SkinnedBlendshapeModel::new(
        perm.iter().map(|&i| model.v_base()[i]).collect(),
        permute_rows3(model.shape_basis()),
        permute_rows3(model.expr_basis()),
        DMatrix::from_fn(2, 12, |r, c| model.joint_regressor()[(r, perm[c])]),
        DMatrix::from_fn(12, 2, |r, c| model.skin_weights()[(perm[r], c)]),
        model.parents().to_vec(),
    )
    .unwrap();
    let a = model.reconstruct(&p).unwrap();
    let b = permuted.reconstruct(&p).unwrap();
    for (i, &src) in perm.iter().enumerate() {
        assert!((b[i] - a[src]).norm() < 1e-12);
    }
}

#[test]
fn rejects_cyclic_hierarchy_and_bad_weights() {
    let good = random_model(1, 5, 1, 1, 2);
    let cyclic = SkinnedBlendshapeModel::new(
        good.v_base().to_vec(),
        good.shape_basis().clone(),
        good.expr_basis().clone(),
        good.joint_regressor().clone(),
        good.skin_weights().clone(),
        vec![Some(1), Some(0)],
    );
    assert!(matches!(cyclic, Err(Error::InvalidModel(_))));
    let mut w = good.skin_weights().clone();
    w[(0, 0)] += 0.1;
    let bad = SkinnedBlendshapeModel::new(
        good.v_base().to_vec(),
        good.shape_basis().clone(),
        good.expr_basis().clone(),
        good.joint_regressor().clone(),
        w,
        good.parents().to_vec(),
    );
    assert!(matches!(bad, Err(Error::InvalidModel(_))));
}

#[test]
fn parent_after_child_in_index_order() {
    // joint 0's parent is joint 1
    let m = random_model(12, 10, 1, 1, 2);
    let reordered = SkinnedBlendshapeModel::new(
        m.v_base().to_vec(),
        m.shape_basis().clone(),
        m.expr_basis().clone(),
        m.joint_regressor().clone(),
        m.skin_weights().clone(),
        vec![Some(1), None],
    )
    .unwrap();
    let p = random_params(&reordered, 12, 0.5);
    let (gs, ge) = reordered
        .reconstruct_vjp(&p, &vec![Vec3::new(0.3, -0.2, 0.7); 10])
        .unwrap();
    let f = |s: &[f64], e: &[f64]| -> f64 {
        let q = PoseParams { shape: s.to_vec(), expression: e.to_vec(), rotations: p.rotations.clone() };
        reordered.reconstruct(&q).unwrap().iter().map(|v| v.dot(&Vec3::new(0.3, -0.2, 0.7))).sum()
    };
    let fd_s = central_difference(&p.shape, 1e-5, |s| f(s, &p.expression));
    let fd_e = central_difference(&p.expression, 1e-5, |e| f(&p.shape, e));
    assert_gradients_match(&gs, &fd_s, 1e-5);
    assert_gradients_match(&ge, &fd_e, 1e-5);
}

#[test]
fn reconstruct_jacobian_matches_finite_differences() {
    for seed in 0..10 {
        let model = random_model(100 + seed, 18, 4, 3, 3);
        let p = random_params(&model, 200 + seed, 1.2);
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let weights: Vec<Vec3> = (0..18)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let objective = |s: &[f64], e: &[f64]| -> f64 {
            let q = PoseParams { shape: s.to_vec(), expression: e.to_vec(), rotations: p.rotations.clone() };
            model.reconstruct(&q).unwrap().iter().zip(&weights).map(|(v, w)| v.dot(w)).sum()
        };
        let (gs, ge) = model.reconstruct_vjp(&p, &weights).unwrap();
        assert_gradients_match(&gs, &central_difference(&p.shape, 1e-5, |s| objective(s, &p.expression)), 1e-5);
        assert_gradients_match(&ge, &central_difference(&p.expression, 1e-5, |e| objective(&p.shape, e)), 1e-5);
    }
}
