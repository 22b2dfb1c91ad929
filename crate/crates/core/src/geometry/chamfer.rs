use nalgebra::SVector;

use crate::error::{Error, Result};

/// Nearest point of `set` to `query` as `(index, distance)`; ties go to the lowest index.
///
/// Returns `None` for an empty set.
pub fn nearest_neighbor<const D: usize>(
    query: &SVector<f64, D>,
    set: &[SVector<f64, D>],
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in set.iter().enumerate() {
        let d2 = (p - query).norm_squared();
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, d2)| (i, d2.sqrt()))
}

/// Mean over `from` of the distance to the nearest point in `to`.
pub(crate) fn mean_nearest_distance<const D: usize>(
    from: &[SVector<f64, D>],
    to: &[SVector<f64, D>],
) -> f64 {
    let sum: f64 = from
        .iter()
        .map(|p| nearest_neighbor(p, to).map_or(0.0, |(_, d)| d))
        .sum();
    sum / from.len() as f64
}

/// Symmetric Chamfer distance between two 3D point sets:
/// half the mean nearest distance from `a` to `b` plus half the reverse.
pub fn chamfer3d(a: &[SVector<f64, 3>], b: &[SVector<f64, 3>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    Ok(0.5 * mean_nearest_distance(a, b) + 0.5 * mean_nearest_distance(b, a))
}
