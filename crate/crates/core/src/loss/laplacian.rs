use crate::error::{check_len, Result};
use crate::geometry::{Vec3, VertexAdjacency};

fn residuals(offsets: &[Vec3], adjacency: &VertexAdjacency) -> Vec<Vec3> {
    adjacency
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            if nbrs.is_empty() {
                offsets[i]
            } else {
                let mean = nbrs.iter().fold(Vec3::zeros(), |a, &j| a + offsets[j]) / nbrs.len() as f64;
                offsets[i] - mean
            }
        })
        .collect()
}

/// Mean over vertices of the L1 norm of `offset_i - mean_{j in N(i)} offset_j`.
///
/// Vertices without neighbours contribute `|offset_i|_1`.
pub fn laplacian_loss(offsets: &[Vec3], adjacency: &VertexAdjacency) -> Result<f64> {
    check_len("adjacency", offsets.len(), adjacency.len())?;
    let total: f64 = residuals(offsets, adjacency).iter().map(|r| r.abs().sum()).sum();
    Ok(total / offsets.len().max(1) as f64)
}

/// Value and (sub)gradient of [`laplacian_loss`]; `sign(0)` is taken as 0.
pub fn laplacian_loss_grad(offsets: &[Vec3], adjacency: &VertexAdjacency) -> Result<(f64, Vec<Vec3>)> {
    let value = laplacian_loss(offsets, adjacency)?;
    let scale = 1.0 / offsets.len().max(1) as f64;
    let sign = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    let mut grad = vec![Vec3::zeros(); offsets.len()];
    for (i, r) in residuals(offsets, adjacency).iter().enumerate() {
        let s = r.map(sign) * scale;
        grad[i] += s;
        let nbrs = adjacency.neighbors(i);
        if !nbrs.is_empty() {
            let share = s / nbrs.len() as f64;
            for &j in nbrs {
                grad[j] -= share;
            }
        }
    }
    Ok((value, grad))
}
