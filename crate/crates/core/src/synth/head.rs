use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{apply_offsets, OffsetField};
use crate::geometry::{build_adjacency, compute_vertex_normals, icosphere, Region, RegionPartition, TriMesh, Vec2, Vec3};
use crate::model::{PoseParams, SkinnedBlendshapeModel};
use crate::raster::{rasterize_triangles, Camera, ImageSize, RasterConfig, SilhouetteImage};

/// Semi-axes of the ellipsoidal head proxy.
const AXES: [f64; 3] = [0.9, 1.1, 1.0];
const NECK_BELOW: f64 = -0.55;
const FACE_ABOVE_Z: f64 = 0.25;
const FACE_TOP: f64 = 0.45;
const EAR_OUTSIDE_X: f64 = 0.85;
const EAR_HALF_HEIGHT: f64 = 0.3;
/// Ground-truth offsets fade in over this many edge hops from face and ears.
const TAPER_HOPS: f64 = 6.0;

/// Region of a unit direction on the proxy.
///
/// Bottom cap is neck, two small side patches are ears, a frontal band is
/// the face and everything else is hair.
pub fn region_of_direction(d: &Vec3) -> Region {
    if d.y < NECK_BELOW {
        Region::Neck
    } else if d.x.abs() > EAR_OUTSIDE_X && d.y.abs() < EAR_HALF_HEIGHT {
        Region::Ears
    } else if d.y < FACE_TOP && d.z > FACE_ABOVE_Z {
        Region::Face
    } else {
        Region::Hair
    }
}

/// Ellipsoidal icosphere with a latitude-band region partition and
/// spherical texture coordinates.
pub fn head_template(subdivisions: u32) -> TriMesh {
    let sphere = icosphere(subdivisions);
    let dirs = sphere.vertices();
    let vertices = dirs.iter().map(|d| Vec3::new(AXES[0] * d.x, AXES[1] * d.y, AXES[2] * d.z)).collect();
    let uv = dirs
        .iter()
        .map(|d| [d.x.atan2(d.z) / (2.0 * PI) + 0.5, d.y.clamp(-1.0, 1.0).acos() / PI])
        .collect();
    let regions = RegionPartition::new(dirs.iter().map(region_of_direction).collect());
    TriMesh::new(vertices, sphere.triangles().to_vec(), uv, regions).expect("head template is valid")
}

/// Two-joint model (neck root, head) with four shape and two expression
/// blendshapes on the template.
pub fn head_model(template: &TriMesh) -> SkinnedBlendshapeModel {
    let v = template.vertices();
    let n = v.len();
    let labels = template.regions().labels();
    let mut shape = DMatrix::zeros(3 * n, 4);
    let mut expr = DMatrix::zeros(3 * n, 2);
    for (i, p) in v.iter().enumerate() {
        // width, height, depth and a crown bulge
        shape[(3 * i, 0)] = 0.1 * p.x;
        shape[(3 * i + 1, 1)] = 0.1 * p.y;
        shape[(3 * i + 2, 2)] = 0.1 * p.z;
        let crown = (p.y / AXES[1]).max(0.0).powi(2) * 0.1;
        shape[(3 * i, 3)] = crown * p.x;
        shape[(3 * i + 1, 3)] = crown * p.y;
        shape[(3 * i + 2, 3)] = crown * p.z;
        if labels[i] == Region::Face {
            // jaw drop and cheek puff
            let low = (-p.y).max(0.0);
            expr[(3 * i + 1, 0)] = -0.1 * low;
            expr[(3 * i, 1)] = 0.05 * p.x;
        }
    }
    let y_min = v.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let neck: Vec<usize> = (0..n).filter(|&i| labels[i] == Region::Neck).collect();
    let base: Vec<usize> = neck.iter().copied().filter(|&i| v[i].y < y_min + 0.15).collect();
    let ring: Vec<usize> = neck.iter().copied().filter(|&i| v[i].y >= y_min + 0.15).collect();
    let mut regressor = DMatrix::zeros(2, n);
    for (row, set) in [&base, &ring].into_iter().enumerate() {
        for &i in set.iter() {
            regressor[(row, i)] = 1.0 / set.len() as f64;
        }
    }
    let mut weights = DMatrix::zeros(n, 2);
    let (lo, hi) = (y_min, NECK_BELOW * AXES[1]);
    for (i, p) in v.iter().enumerate() {
        let t = ((p.y - lo) / (hi - lo)).clamp(0.0, 1.0);
        let head = t * t * (3.0 - 2.0 * t);
        weights[(i, 0)] = 1.0 - head;
        weights[(i, 1)] = head;
    }
    SkinnedBlendshapeModel::new(v.to_vec(), shape, expr, regressor, weights, vec![None, Some(0)])
        .expect("head model is valid")
}

/// Settings of the synthetic head fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub subdivisions: u32,
    pub image_size: ImageSize,
    pub raster: RasterConfig,
    /// Target RMS displacement over hair and neck vertices, as a fraction of
    /// the bounding-box diagonal.
    pub offset_rms_fraction: f64,
    pub camera_scale: f64,
    /// Maximum magnitude of the random shape and expression coefficients.
    pub shape_range: f64,
    /// Maximum magnitude of each head-joint rotation component (radians).
    pub rotation_range: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subdivisions: 3,
            image_size: ImageSize { height: 128, width: 128 },
            raster: RasterConfig::default(),
            offset_rms_fraction: 0.05,
            camera_scale: 0.6,
            shape_range: 0.5,
            rotation_range: 0.05,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.raster.validate()?;
        ImageSize::new(self.image_size.height, self.image_size.width)?;
        if self.subdivisions > 6 {
            return Err(Error::InvalidArgument(format!("subdivisions must be at most 6, got {}", self.subdivisions)));
        }
        for (name, v) in [
            ("offset_rms_fraction", self.offset_rms_fraction),
            ("camera_scale", self.camera_scale),
            ("shape_range", self.shape_range),
            ("rotation_range", self.rotation_range),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be a finite nonnegative number, got {v}")));
            }
        }
        if self.camera_scale == 0.0 {
            return Err(Error::InvalidArgument("camera_scale must be positive".into()));
        }
        Ok(())
    }
}

/// A synthetic fitting instance with known ground truth.
#[derive(Clone, Debug)]
pub struct HeadProxy {
    pub template: TriMesh,
    pub model: SkinnedBlendshapeModel,
    pub params: PoseParams,
    pub camera: Camera,
    /// Ground-truth offsets relative to the posed model.
    pub truth: OffsetField,
    /// Posed model with the ground-truth offsets applied.
    pub deformed: Vec<Vec3>,
    pub target_full: SilhouetteImage,
    pub target_hair: SilhouetteImage,
}

/// Builds the synthetic instance for `seed`; topology and model are shared
/// across seeds.
pub fn synth_head(seed: u64, config: &SynthConfig) -> Result<HeadProxy> {
    config.validate()?;
    let template = head_template(config.subdivisions);
    let model = head_model(&template);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut params = PoseParams::zeros(&model);
    for c in params.shape.iter_mut().chain(params.expression.iter_mut()) {
        *c = config.shape_range * rng.random_range(-1.0..=1.0);
    }
    for c in params.rotations[1].iter_mut() {
        *c = config.rotation_range * rng.random_range(-1.0..=1.0);
    }
    let posed = model.reconstruct(&params)?;
    let normals = compute_vertex_normals(&template, &posed)?;

    let labels = template.regions().labels();
    let fixed = (0..labels.len()).filter(|&i| labels[i].is_fixed());
    let hops = build_adjacency(&template).hop_distances(fixed);
    let dirs: Vec<Vec3> = template
        .vertices()
        .iter()
        .map(|p| Vec3::new(p.x / AXES[0], p.y / AXES[1], p.z / AXES[2]))
        .collect();
    let linear: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let quadratic: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let amplitude: Vec<f64> = dirs
        .iter()
        .zip(&hops)
        .map(|(d, &h)| {
            let poly = 1.0
                + linear[0] * d.x
                + linear[1] * d.y
                + linear[2] * d.z
                + quadratic[0] * d.x * d.x
                + quadratic[1] * d.y * d.y
                + quadratic[2] * d.z * d.z
                + quadratic[3] * d.x * d.y
                + quadratic[4] * d.y * d.z
                + quadratic[5] * d.z * d.x;
            let t = (h as f64 / TAPER_HOPS).min(1.0);
            poly * t * t * (3.0 - 2.0 * t)
        })
        .collect();
    let movable: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i].is_fixed()).collect();
    let rms = (movable.iter().map(|&i| amplitude[i] * amplitude[i]).sum::<f64>() / movable.len().max(1) as f64).sqrt();
    let (lo, hi) = bounding_box(&posed);
    let goal = config.offset_rms_fraction * (hi - lo).norm();
    let scale = if rms > 0.0 { goal / rms } else { 0.0 };
    let coefficients = amplitude.iter().map(|a| Vec3::repeat(a * scale)).collect();
    let truth = OffsetField::zeros(normals, template.regions())?.with_coefficients(coefficients)?;
    let deformed = apply_offsets(&posed, &truth)?;

    let camera = Camera::frontal(config.camera_scale, Vec2::zeros())?;
    let render = |triangles: &[[usize; 3]]| -> Result<SilhouetteImage> {
        let soft = rasterize_triangles(triangles, &deformed, &camera, &config.raster, config.image_size)?;
        // quantise now so in-memory targets equal what is written to disk
        SilhouetteImage::from_u8(config.image_size, &soft.occupancy().to_u8())
    };
    let target_full = render(template.triangles())?;
    let target_hair = render(&template.hair_render_triangles())?;
    Ok(HeadProxy {
        template,
        model,
        params,
        camera,
        truth,
        deformed,
        target_full,
        target_hair,
    })
}

fn bounding_box(points: &[Vec3]) -> (Vec3, Vec3) {
    points.iter().fold(
        (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_partition_has_every_region() {
        let t = head_template(3);
        assert_eq!(t.vertex_count(), 642);
        for r in Region::ALL {
            assert!(t.regions().count(r) > 10, "{r}: {}", t.regions().count(r));
        }
    }

    #[test]
    fn ground_truth_is_masked_and_sized() {
        let h = synth_head(0, &SynthConfig::default()).unwrap();
        let labels = h.template.regions().labels();
        let disp = h.truth.displacements();
        let mut sum = 0.0;
        let mut count = 0;
        for (d, r) in disp.iter().zip(labels) {
            if r.is_fixed() {
                assert_eq!(*d, Vec3::zeros());
            } else {
                sum += d.norm_squared();
                count += 1;
            }
        }
        let posed = h.model.reconstruct(&h.params).unwrap();
        let (lo, hi) = bounding_box(&posed);
        let rms = (sum / count as f64).sqrt();
        assert!((rms / (hi - lo).norm() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn hair_target_is_inside_full_target() {
        let h = synth_head(3, &SynthConfig::default()).unwrap();
        for (a, b) in h.target_hair.values().iter().zip(h.target_full.values()) {
            assert!(*a <= b + 1.0 / 255.0);
        }
        assert!(h.target_full.values().iter().sum::<f64>() > h.target_hair.values().iter().sum::<f64>());
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let c = SynthConfig { image_size: ImageSize::square(32).unwrap(), ..SynthConfig::default() };
        let a = synth_head(5, &c).unwrap();
        let b = synth_head(5, &c).unwrap();
        assert_eq!(a.deformed, b.deformed);
        assert_eq!(a.target_full, b.target_full);
        assert_ne!(a.deformed, synth_head(6, &c).unwrap().deformed);
    }
}
