use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::geometry::{Region, RegionPartition, Vec3};

/// Number of components kept per region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisRanks {
    pub hair: usize,
    pub neck: usize,
}

impl BasisRanks {
    pub fn total(&self) -> usize {
        self.hair + self.neck
    }
}

/// Mean offset plus orthonormal components with per-region support.
///
/// Columns `0..k_hair` are supported on hair rows only and the remaining
/// `k_neck` columns on neck rows only. Singular values are non-increasing
/// within each block.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOffsetBasis {
    mean: DVector<f64>,
    components: DMatrix<f64>,
    singular_values: Vec<f64>,
    ranks: BasisRanks,
    centered: bool,
    total_variance: [f64; 2],
}

impl LinearOffsetBasis {
    /// Assembles a basis from stored parts, checking the support invariant
    /// against `regions` and orthonormality within 1e-6.
    pub fn from_parts(
        mean: DVector<f64>,
        components: DMatrix<f64>,
        singular_values: Vec<f64>,
        ranks: BasisRanks,
        centered: bool,
        regions: &RegionPartition,
    ) -> Result<Self> {
        let rows = 3 * regions.len();
        check_len("basis mean", rows, mean.len())?;
        check_len("basis component rows", rows, components.nrows())?;
        check_len("basis component columns", ranks.total(), components.ncols())?;
        check_len("singular values", ranks.total(), singular_values.len())?;
        for k in 0..ranks.total() {
            let region = if k < ranks.hair { Region::Hair } else { Region::Neck };
            for (v, &label) in regions.labels().iter().enumerate() {
                if label != region && (0..3).any(|c| components[(3 * v + c, k)] != 0.0) {
                    return Err(Error::InvalidArgument(format!("basis column {k} has entries outside the {region} rows")));
                }
            }
        }
        let gram = components.tr_mul(&components);
        let off = (&gram - DMatrix::identity(gram.nrows(), gram.ncols())).abs().max();
        if ranks.total() > 0 && off > 1e-6 {
            return Err(Error::InvalidArgument(format!("basis columns are not orthonormal (max |FᵀF - I| = {off:e})")));
        }
        Ok(Self {
            mean,
            components,
            singular_values,
            ranks,
            centered,
            total_variance: [f64::NAN; 2],
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.mean.len() / 3
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn ranks(&self) -> BasisRanks {
        self.ranks
    }

    pub fn rank(&self) -> usize {
        self.ranks.total()
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    /// Sum of squared kept singular values.
    pub fn captured_variance(&self) -> f64 {
        self.singular_values.iter().map(|s| s * s).sum()
    }

    /// Squared Frobenius norm of the (centred) training data of the hair
    /// and neck blocks; NaN for bases loaded from parts.
    pub fn total_variance(&self) -> [f64; 2] {
        self.total_variance
    }

    /// Fraction of training variance captured, when known.
    pub fn captured_fraction(&self) -> Option<f64> {
        let total = self.total_variance[0] + self.total_variance[1];
        (total.is_finite() && total > 0.0).then(|| self.captured_variance() / total)
    }
}

fn region_rows(regions: &RegionPartition, region: Region) -> Vec<usize> {
    regions.indices(region).into_iter().flat_map(|v| [3 * v, 3 * v + 1, 3 * v + 2]).collect()
}

/// Top-`k` left singular vectors of `block`, sorted by singular value, each
/// with its largest-magnitude entry made positive.
fn top_components(block: DMatrix<f64>, k: usize) -> (DMatrix<f64>, Vec<f64>) {
    if k == 0 {
        return (DMatrix::zeros(block.nrows(), 0), vec![]);
    }
    let svd = block.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let mut cols = DMatrix::zeros(u.nrows(), k);
    let mut values = Vec::with_capacity(k);
    for (j, &i) in order.iter().take(k).enumerate() {
        let mut col = u.column(i).into_owned();
        let pivot = col.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
        cols.set_column(j, &col);
        values.push(svd.singular_values[i]);
    }
    (cols, values)
}

/// Per-region PCA of the offset matrix `data` (3N × M, one field per
/// column).
///
/// Hair and neck row blocks are decomposed independently and embedded
/// into full rows. With `center`, the mean column is removed first;
/// without it the mean is zero and projection is the plain pseudo-inverse.
pub fn fit_pca(data: &DMatrix<f64>, ranks: BasisRanks, regions: &RegionPartition, center: bool) -> Result<LinearOffsetBasis> {
    let rows = 3 * regions.len();
    check_len("offset matrix rows", rows, data.nrows())?;
    let m = data.ncols();
    if ranks.total() == 0 {
        return Err(Error::InvalidRank { rank: 0, limit: m, what: "at least one component is required".into() });
    }
    let mut mean = DVector::zeros(rows);
    let mut components = DMatrix::zeros(rows, ranks.total());
    let mut singular_values = Vec::with_capacity(ranks.total());
    let mut total_variance = [0.0; 2];
    let mut offset = 0;
    for (b, (region, k)) in [(Region::Hair, ranks.hair), (Region::Neck, ranks.neck)].into_iter().enumerate() {
        let idx = region_rows(regions, region);
        if k > m {
            return Err(Error::InvalidRank { rank: k, limit: m, what: format!("{region} rank exceeds the number of fields") });
        }
        if k > idx.len() {
            return Err(Error::InvalidRank { rank: k, limit: idx.len(), what: format!("{region} rank exceeds the region's row count") });
        }
        let mut block = data.select_rows(&idx);
        if center && m > 0 {
            for (r, &row) in idx.iter().enumerate() {
                let mu = block.row(r).sum() / m as f64;
                mean[row] = mu;
                block.row_mut(r).add_scalar_mut(-mu);
            }
        }
        total_variance[b] = block.norm_squared();
        let (cols, values) = top_components(block, k);
        for (r, &row) in idx.iter().enumerate() {
            for j in 0..k {
                components[(row, offset + j)] = cols[(r, j)];
            }
        }
        singular_values.extend(values);
        offset += k;
    }
    Ok(LinearOffsetBasis {
        mean,
        components,
        singular_values,
        ranks,
        centered: center,
        total_variance,
    })
}

/// Least-squares coefficients `(FᵀF)⁻¹ Fᵀ (field - mean)`.
pub fn project(basis: &LinearOffsetBasis, field: &DVector<f64>) -> Result<DVector<f64>> {
    check_len("offset vector", basis.mean.len(), field.len())?;
    let rhs = basis.components.tr_mul(&(field - &basis.mean));
    let gram = basis.components.tr_mul(&basis.components);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("basis Gram matrix is not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// `mean + F η`.
pub fn reconstruct_linear(basis: &LinearOffsetBasis, coefficients: &DVector<f64>) -> Result<DVector<f64>> {
    check_len("basis coefficients", basis.rank(), coefficients.len())?;
    Ok(&basis.mean + &basis.components * coefficients)
}

/// Sets coefficient `index` to `value` and reconstructs.
pub fn edit_coefficient(
    basis: &LinearOffsetBasis,
    coefficients: &DVector<f64>,
    index: usize,
    value: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if index >= basis.rank() {
        return Err(Error::IndexOutOfRange { index, len: basis.rank() });
    }
    let mut edited = coefficients.clone();
    check_len("basis coefficients", basis.rank(), edited.len())?;
    edited[index] = value;
    let field = reconstruct_linear(basis, &edited)?;
    Ok((edited, field))
}

/// Row-major `x0 y0 z0 x1 ...` vector of a per-vertex field.
pub fn field_to_vector(field: &[Vec3]) -> DVector<f64> {
    DVector::from_iterator(3 * field.len(), field.iter().flat_map(|v| [v.x, v.y, v.z]))
}

pub fn vector_to_field(v: &DVector<f64>) -> Result<Vec<Vec3>> {
    if v.len() % 3 != 0 {
        return Err(Error::DimensionMismatch { what: "offset vector (multiple of 3)", expected: 3 * (v.len() / 3 + 1), found: v.len() });
    }
    Ok(v.as_slice().chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect())
}

#[cfg(test)]
#[path = "pca_tests.rs"]
mod tests;
