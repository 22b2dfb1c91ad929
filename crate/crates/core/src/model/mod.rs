//! Skinned blendshape head model: `skin(v_base + B·shape + D·expression, pose)`.

mod rotation;

pub use rotation::{rodrigues, SMALL_ANGLE};

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::Vec3;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Shape, expression and per-joint axis-angle rotations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseParams {
    pub shape: Vec<f64>,
    pub expression: Vec<f64>,
    /// One axis-angle vector per joint, radians.
    pub rotations: Vec<[f64; 3]>,
}

impl PoseParams {
    pub fn zeros(model: &SkinnedBlendshapeModel) -> Self {
        Self {
            shape: vec![0.0; model.shape_dim()],
            expression: vec![0.0; model.expression_dim()],
            rotations: vec![[0.0; 3]; model.joint_count()],
        }
    }

    pub fn validate(&self, model: &SkinnedBlendshapeModel) -> Result<()> {
        check_len("shape coefficients", model.shape_dim(), self.shape.len())?;
        check_len("expression coefficients", model.expression_dim(), self.expression.len())?;
        check_len("joint rotations", model.joint_count(), self.rotations.len())?;
        if self
            .shape
            .iter()
            .chain(&self.expression)
            .chain(self.rotations.iter().flatten())
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("pose parameters"));
        }
        Ok(())
    }

    fn rotation_vectors(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.rotations.iter().map(|r| Vec3::from(*r))
    }
}

/// Affine map `x -> linear * x + translation` of one joint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointTransform {
    pub linear: Matrix3<f64>,
    pub translation: Vec3,
}

impl JointTransform {
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.linear * x + self.translation
    }
}

/// Blendshape model with joint-based linear blend skinning.
///
/// Bases are stored as `(3N) x K` matrices whose rows are ordered vertex by
/// vertex as `(x, y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkinnedBlendshapeModel {
    v_base: Vec<Vec3>,
    shape_basis: DMatrix<f64>,
    expr_basis: DMatrix<f64>,
    joint_regressor: DMatrix<f64>,
    skin_weights: DMatrix<f64>,
    parents: Vec<Option<usize>>,
    /// Joints ordered so that every parent precedes its children.
    order: Vec<usize>,
}

impl SkinnedBlendshapeModel {
    pub fn new(
        v_base: Vec<Vec3>,
        shape_basis: DMatrix<f64>,
        expr_basis: DMatrix<f64>,
        joint_regressor: DMatrix<f64>,
        skin_weights: DMatrix<f64>,
        parents: Vec<Option<usize>>,
    ) -> Result<Self> {
        let n = v_base.len();
        let j = parents.len();
        check_len("shape basis rows", 3 * n, shape_basis.nrows())?;
        check_len("expression basis rows", 3 * n, expr_basis.nrows())?;
        check_len("joint regressor rows", j, joint_regressor.nrows())?;
        check_len("joint regressor columns", n, joint_regressor.ncols())?;
        check_len("skin weight rows", n, skin_weights.nrows())?;
        check_len("skin weight columns", j, skin_weights.ncols())?;
        if j == 0 {
            return Err(Error::InvalidModel("model needs at least one joint".into()));
        }
        for (k, row) in joint_regressor.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "joint regressor row {k} sums to {sum}"
                )));
            }
        }
        for (i, row) in skin_weights.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "skin weights of vertex {i} are not a probability vector"
                )));
            }
        }
        let all_finite = v_base.iter().flat_map(|v| v.iter()).all(|x| x.is_finite())
            && [&shape_basis, &expr_basis, &joint_regressor, &skin_weights]
                .iter()
                .all(|m| m.iter().all(|x| x.is_finite()));
        if !all_finite {
            return Err(Error::NonFinite("model arrays"));
        }
        let order = topological_order(&parents)?;
        Ok(Self {
            v_base,
            shape_basis,
            expr_basis,
            joint_regressor,
            skin_weights,
            parents,
            order,
        })
    }

    /// Model with no blendshapes and a single root joint owning every vertex.
    pub fn rigid(v_base: Vec<Vec3>) -> Self {
        let n = v_base.len();
        let regressor = DMatrix::from_element(1, n, 1.0 / n.max(1) as f64);
        Self::new(
            v_base,
            DMatrix::zeros(3 * n, 0),
            DMatrix::zeros(3 * n, 0),
            regressor,
            DMatrix::from_element(n, 1, 1.0),
            vec![None],
        )
        .expect("rigid model is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.v_base.len()
    }

    pub fn shape_dim(&self) -> usize {
        self.shape_basis.ncols()
    }

    pub fn expression_dim(&self) -> usize {
        self.expr_basis.ncols()
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn v_base(&self) -> &[Vec3] {
        &self.v_base
    }

    pub fn shape_basis(&self) -> &DMatrix<f64> {
        &self.shape_basis
    }

    pub fn expr_basis(&self) -> &DMatrix<f64> {
        &self.expr_basis
    }

    pub fn joint_regressor(&self) -> &DMatrix<f64> {
        &self.joint_regressor
    }

    pub fn skin_weights(&self) -> &DMatrix<f64> {
        &self.skin_weights
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    /// `v_base + B·shape + D·expression`, reshaped to one row per vertex.
    pub fn blend(&self, shape: &[f64], expression: &[f64]) -> Result<Vec<Vec3>> {
        check_len("shape coefficients", self.shape_dim(), shape.len())?;
        check_len("expression coefficients", self.expression_dim(), expression.len())?;
        let delta = &self.shape_basis * DVector::from_column_slice(shape)
            + &self.expr_basis * DVector::from_column_slice(expression);
        Ok(self
            .v_base
            .iter()
            .enumerate()
            .map(|(i, v)| v + Vec3::new(delta[3 * i], delta[3 * i + 1], delta[3 * i + 2]))
            .collect())
    }

    /// Joint locations regressed from (blended) vertices.
    pub fn joints(&self, vertices: &[Vec3]) -> Result<Vec<Vec3>> {
        check_len("vertex positions", self.vertex_count(), vertices.len())?;
        Ok(self
            .joint_regressor
            .row_iter()
            .map(|row| {
                row.iter()
                    .zip(vertices)
                    .fold(Vec3::zeros(), |acc, (&w, v)| acc + w * v)
            })
            .collect())
    }

    /// World transform of every joint: rotation about its own location,
    /// composed with the transforms of its ancestors.
    pub fn joint_transforms(&self, joints: &[Vec3], rotations: &[Vec3]) -> Result<Vec<JointTransform>> {
        check_len("joint locations", self.joint_count(), joints.len())?;
        check_len("joint rotations", self.joint_count(), rotations.len())?;
        let mut transforms = vec![
            JointTransform {
                linear: Matrix3::identity(),
                translation: Vec3::zeros(),
            };
            self.joint_count()
        ];
        for &k in &self.order {
            let r = rodrigues(&rotations[k]);
            let local = JointTransform {
                linear: r,
                translation: joints[k] - r * joints[k],
            };
            transforms[k] = match self.parents[k] {
                None => local,
                Some(p) => {
                    let parent = transforms[p];
                    JointTransform {
                        linear: parent.linear * local.linear,
                        translation: parent.linear * local.translation + parent.translation,
                    }
                }
            };
        }
        Ok(transforms)
    }

    /// Linear blend skinning of `blended` vertices under per-joint rotations.
    pub fn skin(&self, blended: &[Vec3], rotations: &[[f64; 3]]) -> Result<Vec<Vec3>> {
        check_len("vertex positions", self.vertex_count(), blended.len())?;
        check_len("joint rotations", self.joint_count(), rotations.len())?;
        if rotations.iter().flatten().all(|&x| x == 0.0) {
            return Ok(blended.to_vec());
        }
        let rotations: Vec<Vec3> = rotations.iter().map(|r| Vec3::from(*r)).collect();
        let joints = self.joints(blended)?;
        let transforms = self.joint_transforms(&joints, &rotations)?;
        Ok(blended
            .iter()
            .enumerate()
            .map(|(i, v)| {
                self.skin_weights
                    .row(i)
                    .iter()
                    .zip(&transforms)
                    .filter(|(&w, _)| w != 0.0)
                    .fold(Vec3::zeros(), |acc, (&w, t)| acc + w * t.apply(v))
            })
            .collect())
    }

    /// Full reconstruction `skin(blend(shape, expression), rotations)`.
    pub fn reconstruct(&self, params: &PoseParams) -> Result<Vec<Vec3>> {
        params.validate(self)?;
        let blended = self.blend(&params.shape, &params.expression)?;
        self.skin(&blended, &params.rotations)
    }

    /// Vector-Jacobian product of [`reconstruct`](Self::reconstruct) with
    /// respect to the shape and expression coefficients.
    ///
    /// `upstream` holds `dL/dv` for every reconstructed vertex; returns
    /// `(dL/dshape, dL/dexpression)`.
    pub fn reconstruct_vjp(&self, params: &PoseParams, upstream: &[Vec3]) -> Result<(Vec<f64>, Vec<f64>)> {
        params.validate(self)?;
        check_len("upstream gradient", self.vertex_count(), upstream.len())?;
        let blended = self.blend(&params.shape, &params.expression)?;
        let rotations: Vec<Vec3> = params.rotation_vectors().collect();
        let grad_blended = self.skin_vjp(&blended, &rotations, upstream)?;
        let flat = DVector::from_iterator(
            3 * grad_blended.len(),
            grad_blended.iter().flat_map(|g| g.iter().copied()),
        );
        let g_shape = self.shape_basis.tr_mul(&flat);
        let g_expr = self.expr_basis.tr_mul(&flat);
        Ok((g_shape.iter().copied().collect(), g_expr.iter().copied().collect()))
    }

    /// `dL/dblended` given `dL/dskinned`, including the dependence of the
    /// joint locations on the blended vertices.
    pub fn skin_vjp(&self, blended: &[Vec3], rotations: &[Vec3], upstream: &[Vec3]) -> Result<Vec<Vec3>> {
        check_len("vertex positions", self.vertex_count(), blended.len())?;
        check_len("upstream gradient", self.vertex_count(), upstream.len())?;
        let joints = self.joints(blended)?;
        let transforms = self.joint_transforms(&joints, rotations)?;
        let j = self.joint_count();

        let mut grad_linear = vec![Matrix3::<f64>::zeros(); j];
        let mut grad_translation = vec![Vec3::zeros(); j];
        let mut grad = Vec::with_capacity(blended.len());
        for (i, (x, g)) in blended.iter().zip(upstream).enumerate() {
            let mut gx = Vec3::zeros();
            for (k, &w) in self.skin_weights.row(i).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                gx += w * transforms[k].linear.tr_mul(g);
                grad_linear[k] += w * g * x.transpose();
                grad_translation[k] += w * g;
            }
            grad.push(gx);
        }

        // Children first: push transform gradients up to parents and joints.
        let mut grad_joints = vec![Vec3::zeros(); j];
        for &k in self.order.iter().rev() {
            let r = rodrigues(&rotations[k]);
            let offset = joints[k] - r * joints[k];
            let (parent_linear, parent) = match self.parents[k] {
                Some(p) => (transforms[p].linear, Some(p)),
                None => (Matrix3::identity(), None),
            };
            let gt = grad_translation[k];
            grad_joints[k] += (Matrix3::identity() - r).tr_mul(&parent_linear.tr_mul(&gt));
            if let Some(p) = parent {
                let gl = grad_linear[k];
                grad_linear[p] += gl * r.transpose() + gt * offset.transpose();
                grad_translation[p] += gt;
            }
        }

        for (k, row) in self.joint_regressor.row_iter().enumerate() {
            let gj = grad_joints[k];
            for (i, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    grad[i] += w * gj;
                }
            }
        }
        Ok(grad)
    }
}

fn topological_order(parents: &[Option<usize>]) -> Result<Vec<usize>> {
    let j = parents.len();
    let mut children = vec![Vec::new(); j];
    let mut roots = Vec::new();
    for (k, p) in parents.iter().enumerate() {
        match *p {
            None => roots.push(k),
            Some(p) if p < j && p != k => children[p].push(k),
            Some(p) => {
                return Err(Error::InvalidModel(format!(
                    "joint {k} has invalid parent {p}"
                )))
            }
        }
    }
    let mut order = Vec::with_capacity(j);
    let mut stack: Vec<usize> = roots.into_iter().rev().collect();
    while let Some(k) = stack.pop() {
        order.push(k);
        stack.extend(children[k].iter().rev());
    }
    if order.len() != j {
        return Err(Error::InvalidModel("joint hierarchy contains a cycle".into()));
    }
    Ok(order)
}

#[cfg(test)]
mod tests;
