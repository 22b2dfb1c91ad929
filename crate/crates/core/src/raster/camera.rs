use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};

/// Weak-perspective camera: rotate, drop depth, scale, translate.
///
/// The viewer looks down the `-z` axis of the rotated frame, so larger depth
/// values are closer to the camera.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraFile", into = "CameraFile")]
pub struct Camera {
    scale: f64,
    translation: Vec2,
    rotation: Matrix3<f64>,
}

/// JSON form: `{"scale": s, "translation": [tx, ty], "rotation": [[..], [..], [..]]}`
/// with the rotation given row by row.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    scale: f64,
    translation: [f64; 2],
    #[serde(default = "identity_rows")]
    rotation: [[f64; 3]; 3],
}

fn identity_rows() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

impl TryFrom<CameraFile> for Camera {
    type Error = Error;

    fn try_from(f: CameraFile) -> Result<Self> {
        let r = f.rotation;
        Camera::new(
            f.scale,
            Vec2::from(f.translation),
            Matrix3::new(
                r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
            ),
        )
    }
}

impl From<Camera> for CameraFile {
    fn from(c: Camera) -> Self {
        let r = c.rotation;
        CameraFile {
            scale: c.scale,
            translation: [c.translation[0], c.translation[1]],
            rotation: [0, 1, 2].map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)]]),
        }
    }
}

impl Camera {
    pub fn new(scale: f64, translation: Vec2, rotation: Matrix3<f64>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("camera scale must be positive, got {scale}")));
        }
        if !translation.iter().chain(rotation.iter()).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("camera"));
        }
        if (rotation.transpose() * rotation - Matrix3::identity()).amax() > 1e-6 {
            return Err(Error::InvalidArgument("camera rotation is not orthonormal".into()));
        }
        Ok(Self {
            scale,
            translation,
            rotation,
        })
    }

    /// Identity rotation with the given scale and translation.
    pub fn frontal(scale: f64, translation: Vec2) -> Result<Self> {
        Self::new(scale, translation, Matrix3::identity())
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn translation(&self) -> Vec2 {
        self.translation
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn with_translation(&self, translation: Vec2) -> Self {
        Self {
            translation,
            ..*self
        }
    }

    pub fn project_point(&self, v: &Vec3) -> (Vec2, f64) {
        let r = self.rotation * v;
        (self.scale * r.xy() + self.translation, r[2])
    }
}

/// Projected NDC positions and camera-frame depths of a vertex set.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub ndc: Vec<Vec2>,
    pub depth: Vec<f64>,
}

pub fn project(camera: &Camera, vertices: &[Vec3]) -> Projection {
    let (ndc, depth) = vertices.iter().map(|v| camera.project_point(v)).unzip();
    Projection { ndc, depth }
}

/// Pull NDC-space gradients back to world-space vertex gradients.
pub fn project_vjp(camera: &Camera, ndc_grad: &[Vec2]) -> Vec<Vec3> {
    ndc_grad
        .iter()
        .map(|g| camera.scale * camera.rotation.tr_mul(&Vec3::new(g[0], g[1], 0.0)))
        .collect()
}
