use crate::error::{check_len, Error, Result};
use crate::geometry::{nearest_neighbor, Vec2};

/// Symmetric 2D Chamfer loss between projected vertices and mask samples,
/// `1/(2N) sum_p |p - nn(p, samples)| + 1/(2N) sum_q |q - nn(q, projected)|`.
pub fn chamfer2d_loss(projected: &[Vec2], samples: &[Vec2]) -> Result<f64> {
    Ok(chamfer2d_loss_grad(projected, samples)?.0)
}

/// Value and gradient with respect to `projected`; samples are data.
///
/// Nearest-neighbour ties go to the lowest index; coincident pairs
/// contribute a zero subgradient.
pub fn chamfer2d_loss_grad(projected: &[Vec2], samples: &[Vec2]) -> Result<(f64, Vec<Vec2>)> {
    if projected.is_empty() || samples.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    check_len("mask samples", projected.len(), samples.len())?;
    let scale = 0.5 / projected.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![Vec2::zeros(); projected.len()];
    let unit = |d: Vec2, len: f64| if len > 0.0 { d / len } else { Vec2::zeros() };
    for (i, p) in projected.iter().enumerate() {
        let (j, dist) = nearest_neighbor(p, samples).expect("non-empty");
        value += scale * dist;
        grad[i] += scale * unit(p - samples[j], dist);
    }
    for q in samples {
        let (i, dist) = nearest_neighbor(q, projected).expect("non-empty");
        value += scale * dist;
        grad[i] += scale * unit(projected[i] - q, dist);
    }
    Ok((value, grad))
}
