//! Finite-difference utilities for checking analytic gradients.
//!
//! The comparison metric is a per-component relative error. Components whose
//! magnitude is below one thousandth of the largest component are compared
//! against that floor instead of their own magnitude, so that tiny entries
//! dominated by rounding do not produce spurious failures.

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

const FLOOR_FRACTION: f64 = 1e-3;

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate.
pub fn central_difference(x: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let plus = f(&probe);
            probe[i] = orig - step;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// Largest per-component relative error between two gradients.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient lengths differ");
    let scale = analytic
        .iter()
        .chain(numeric)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = (FLOOR_FRACTION * scale).max(1e-12);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Panics with a component dump when the relative error reaches `tolerance`.
#[track_caller]
pub fn assert_gradients_match(analytic: &[f64], numeric: &[f64], tolerance: f64) {
    let err = max_relative_error(analytic, numeric);
    if err >= tolerance {
        let worst: Vec<String> = analytic
            .iter()
            .zip(numeric)
            .enumerate()
            .filter(|(_, (a, n))| (*a - *n).abs() > 0.0)
            .take(12)
            .map(|(i, (a, n))| format!("[{i}] analytic={a:.6e} numeric={n:.6e}"))
            .collect();
        panic!(
            "gradient mismatch: max relative error {err:.3e} >= {tolerance:.1e}\n{}",
            worst.join("\n")
        );
    }
}

/// Flatten rows of fixed width into one coordinate vector.
pub fn flatten<const D: usize>(rows: &[nalgebra::SVector<f64, D>]) -> Vec<f64> {
    rows.iter().flat_map(|r| r.iter().copied()).collect()
}

/// Inverse of [`flatten`].
pub fn unflatten<const D: usize>(flat: &[f64]) -> Vec<nalgebra::SVector<f64, D>> {
    flat.chunks_exact(D)
        .map(nalgebra::SVector::<f64, D>::from_column_slice)
        .collect()
}
