use nalgebra::Matrix3;

use crate::geometry::Vec3;

/// Below this angle the closed form is replaced by its second-order expansion.
pub const SMALL_ANGLE: f64 = 1e-8;

pub(crate) fn skew(w: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

/// Rotation matrix of an axis-angle vector (axis scaled by the angle in radians).
pub fn rodrigues(axis_angle: &Vec3) -> Matrix3<f64> {
    let theta = axis_angle.norm();
    let k = skew(axis_angle);
    if theta < SMALL_ANGLE {
        return Matrix3::identity() + k + 0.5 * k * k;
    }
    let a = theta.sin() / theta;
    let b = (1.0 - theta.cos()) / (theta * theta);
    Matrix3::identity() + a * k + b * k * k
}
