use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{read_f32_le, read_json, read_regions, write_f32_le, write_json, write_regions};
use crate::basis::{BasisRanks, LinearOffsetBasis};
use crate::error::{check_len, Result};
use crate::geometry::RegionPartition;

/// `manifest.json` of a basis directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisManifest {
    pub vertex_count: usize,
    pub k_hair: usize,
    pub k_neck: usize,
    pub centered: bool,
    /// Captured over total training variance, when known.
    pub captured_fraction: Option<f64>,
}

/// Writes `manifest.json`, `regions.json`, `mean.bin`, `components.bin`
/// (3N × K row-major) and `singular_values.bin`.
pub fn save_basis_dir(dir: &Path, basis: &LinearOffsetBasis, regions: &RegionPartition) -> Result<()> {
    check_len("basis vertices", regions.len(), basis.vertex_count())?;
    let ranks = basis.ranks();
    let manifest = BasisManifest {
        vertex_count: basis.vertex_count(),
        k_hair: ranks.hair,
        k_neck: ranks.neck,
        centered: basis.centered(),
        captured_fraction: basis.captured_fraction(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    write_regions(&dir.join("regions.json"), regions)?;
    write_f32_le(&dir.join("mean.bin"), basis.mean().iter().copied())?;
    let f = basis.components();
    write_f32_le(&dir.join("components.bin"), (0..f.nrows()).flat_map(|r| (0..f.ncols()).map(move |c| f[(r, c)])))?;
    write_f32_le(&dir.join("singular_values.bin"), basis.singular_values().iter().copied())?;
    Ok(())
}

pub fn load_basis_dir(dir: &Path) -> Result<(LinearOffsetBasis, RegionPartition)> {
    let m: BasisManifest = read_json(&dir.join("manifest.json"))?;
    let regions = read_regions(&dir.join("regions.json"), m.vertex_count)?;
    let rows = 3 * m.vertex_count;
    let k = m.k_hair + m.k_neck;
    let mean = DVector::from_vec(read_f32_le(&dir.join("mean.bin"), rows)?);
    let components = DMatrix::from_row_slice(rows, k, &read_f32_le(&dir.join("components.bin"), rows * k)?);
    let singular = read_f32_le(&dir.join("singular_values.bin"), k)?;
    let ranks = BasisRanks { hair: m.k_hair, neck: m.k_neck };
    let basis = LinearOffsetBasis::from_parts(mean, components, singular, ranks, m.centered, &regions)?;
    Ok((basis, regions))
}
