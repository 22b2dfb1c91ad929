use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{load_mesh, read_f32_le, read_json, write_f32_le, write_json, write_obj, write_regions};
use crate::error::{check_len, Error, Result};
use crate::geometry::{TriMesh, Vec3};
use crate::model::SkinnedBlendshapeModel;

/// `manifest.json` of a model directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelManifest {
    pub format: String,
    pub version: u32,
    pub vertex_count: usize,
    pub shape_dim: usize,
    pub expression_dim: usize,
    pub joint_count: usize,
    pub parents: Vec<Option<usize>>,
}

impl ModelManifest {
    pub const FORMAT: &'static str = "headfit-model";
}

fn row_major(m: &DMatrix<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |r| (0..m.ncols()).map(move |c| m[(r, c)]))
}

fn read_matrix(path: &Path, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    Ok(DMatrix::from_row_slice(rows, cols, &read_f32_le(path, rows * cols)?))
}

/// Writes `manifest.json`, `template.obj`, `regions.json` and the model
/// arrays as little-endian `f32` row-major `.bin` files.
pub fn save_model_dir(dir: &Path, template: &TriMesh, model: &SkinnedBlendshapeModel) -> Result<()> {
    check_len("template vertices", model.vertex_count(), template.vertex_count())?;
    let manifest = ModelManifest {
        format: ModelManifest::FORMAT.into(),
        version: 1,
        vertex_count: model.vertex_count(),
        shape_dim: model.shape_dim(),
        expression_dim: model.expression_dim(),
        joint_count: model.joint_count(),
        parents: model.parents().to_vec(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    write_obj(&dir.join("template.obj"), &template.with_vertices(model.v_base().to_vec())?)?;
    write_regions(&dir.join("regions.json"), template.regions())?;
    write_f32_le(&dir.join("v_base.bin"), model.v_base().iter().flat_map(|v| [v.x, v.y, v.z]))?;
    write_f32_le(&dir.join("shape_basis.bin"), row_major(model.shape_basis()))?;
    write_f32_le(&dir.join("expr_basis.bin"), row_major(model.expr_basis()))?;
    write_f32_le(&dir.join("joint_regressor.bin"), row_major(model.joint_regressor()))?;
    write_f32_le(&dir.join("skin_weights.bin"), row_major(model.skin_weights()))?;
    Ok(())
}

/// Loads the template mesh (with `v_base` vertices) and the model.
pub fn load_model_dir(dir: &Path) -> Result<(TriMesh, SkinnedBlendshapeModel)> {
    let path = dir.join("manifest.json");
    let m: ModelManifest = read_json(&path)?;
    if m.format != ModelManifest::FORMAT || m.version != 1 {
        return Err(Error::Format {
            format: "model manifest",
            path,
            message: format!("expected {} version 1, found {} version {}", ModelManifest::FORMAT, m.format, m.version),
        });
    }
    let n = m.vertex_count;
    let template = load_mesh(&dir.join("template.obj"), Some(&dir.join("regions.json")))?;
    check_len("template vertices", n, template.vertex_count())?;
    let v: Vec<Vec3> = read_f32_le(&dir.join("v_base.bin"), 3 * n)?
        .chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect();
    let model = SkinnedBlendshapeModel::new(
        v.clone(),
        read_matrix(&dir.join("shape_basis.bin"), 3 * n, m.shape_dim)?,
        read_matrix(&dir.join("expr_basis.bin"), 3 * n, m.expression_dim)?,
        read_matrix(&dir.join("joint_regressor.bin"), m.joint_count, n)?,
        read_matrix(&dir.join("skin_weights.bin"), n, m.joint_count)?,
        m.parents,
    )?;
    Ok((template.with_vertices(v)?, model))
}
