use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{chamfer2d_loss_grad, dice_loss, dice_loss_grad, laplacian_loss_grad, sample_mask_points, squared_error_grad};
use super::{LossReport, LossWeights};
use crate::error::{check_len, Result};
use crate::fit::{apply_offsets, OffsetField};
use crate::geometry::{build_adjacency, Region, TriMesh, Vec2, Vec3, VertexAdjacency};
use crate::raster::{
    project, project_vjp, rasterize_triangles, rasterize_triangles_grad, visible_vertices, Camera, RasterConfig,
    SilhouetteImage,
};

/// Fixed data of one fitting problem: topology, camera and target masks.
#[derive(Clone, Debug)]
pub struct GeometricScene<'a> {
    mesh: &'a TriMesh,
    adjacency: VertexAdjacency,
    hair_triangles: Vec<[usize; 3]>,
    camera: Camera,
    raster: RasterConfig,
    target_hair: &'a SilhouetteImage,
    target_full: &'a SilhouetteImage,
}

impl<'a> GeometricScene<'a> {
    pub fn new(
        mesh: &'a TriMesh,
        camera: Camera,
        raster: RasterConfig,
        target_hair: &'a SilhouetteImage,
        target_full: &'a SilhouetteImage,
    ) -> Result<Self> {
        raster.validate()?;
        target_hair.same_size(target_full)?;
        Ok(Self {
            mesh,
            adjacency: build_adjacency(mesh),
            hair_triangles: mesh.hair_render_triangles(),
            camera,
            raster,
            target_hair,
            target_full,
        })
    }

    pub fn mesh(&self) -> &TriMesh {
        self.mesh
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    pub fn raster(&self) -> &RasterConfig {
        &self.raster
    }

    pub fn target_hair(&self) -> &SilhouetteImage {
        self.target_hair
    }

    pub fn target_full(&self) -> &SilhouetteImage {
        self.target_full
    }

    pub fn hair_triangles(&self) -> &[[usize; 3]] {
        &self.hair_triangles
    }

    fn render(&self, triangles: &[[usize; 3]], positions: &[Vec3]) -> Result<crate::raster::SoftRender> {
        rasterize_triangles(triangles, positions, &self.camera, &self.raster, self.target_full.size())
    }
}

/// Visible vertex indices paired with an equal number of mask samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChamferSamples {
    visible: Vec<usize>,
    samples: Vec<Vec2>,
}

impl ChamferSamples {
    /// No Chamfer term.
    pub fn none() -> Self {
        Self::default()
    }

    /// Selects the vertices visible at `positions` and draws as many points
    /// from the full target mask.
    pub fn draw(scene: &GeometricScene, positions: &[Vec3], seed: u64) -> Result<Self> {
        let mask = visible_vertices(scene.mesh, positions, &scene.camera, scene.target_full.size())?;
        let visible: Vec<usize> = mask.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
        if visible.is_empty() {
            return Ok(Self::none());
        }
        let samples = sample_mask_points(scene.target_full, visible.len(), seed)?;
        Ok(Self { visible, samples })
    }

    pub fn visible(&self) -> &[usize] {
        &self.visible
    }

    pub fn samples(&self) -> &[Vec2] {
        &self.samples
    }
}

/// Gradient magnitudes (L1) landing on coefficient rows that routing must
/// keep at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoutingStats {
    pub face_ear: f64,
    pub hair_term_on_neck: f64,
    pub full_term_on_hair: f64,
}

impl RoutingStats {
    pub fn accumulate(&mut self, other: &RoutingStats) {
        self.face_ear += other.face_ear;
        self.hair_term_on_neck += other.hair_term_on_neck;
        self.full_term_on_hair += other.full_term_on_hair;
    }

    pub fn is_clean(&self) -> bool {
        self.face_ear == 0.0 && self.hair_term_on_neck == 0.0 && self.full_term_on_hair == 0.0
    }
}

/// Output of [`total_geometric_loss`].
#[derive(Clone, Debug)]
pub struct GeometricEvaluation {
    pub report: LossReport,
    /// Routed gradient with respect to the offset coefficients.
    pub coefficient_grad: Vec<Vec3>,
    /// Unrouted gradient with respect to the offset vertex positions.
    pub position_grad: Vec<Vec3>,
    pub routing: RoutingStats,
    pub render_hair: SilhouetteImage,
    pub render_full: SilhouetteImage,
}

fn keep_rows(grad: &[Vec3], labels: &[Region], region: Region) -> Vec<Vec3> {
    grad.iter()
        .zip(labels)
        .map(|(g, &r)| if r == region { *g } else { Vec3::zeros() })
        .collect()
}

fn l1_on(grad: &[Vec3], labels: &[Region], keep: impl Fn(Region) -> bool) -> f64 {
    grad.iter().zip(labels).filter(|(_, &r)| keep(r)).map(|(g, _)| g.abs().sum()).sum()
}

fn chamfer_term(
    scene: &GeometricScene,
    positions: &[Vec3],
    chamfer: &ChamferSamples,
    scale: f64,
) -> Result<Option<(f64, Vec<Vec3>)>> {
    if chamfer.visible.is_empty() {
        return Ok(None);
    }
    let points: Vec<Vec3> = chamfer.visible.iter().map(|&i| positions[i]).collect();
    let projected = project(&scene.camera, &points).ndc;
    let (value, g2) = chamfer2d_loss_grad(&projected, &chamfer.samples)?;
    let mut grad = vec![Vec3::zeros(); positions.len()];
    if scale != 0.0 {
        let scaled: Vec<Vec2> = g2.iter().map(|g| g * scale).collect();
        for (&i, g) in chamfer.visible.iter().zip(project_vjp(&scene.camera, &scaled)) {
            grad[i] += g;
        }
    }
    Ok(Some((value, grad)))
}

/// Weighted geometric objective at `base + field` with routed gradients.
///
/// The hair-silhouette term reaches only hair coefficients and the
/// full-silhouette and Dice terms only neck coefficients; Chamfer and
/// Laplacian terms reach every movable row.
pub fn total_geometric_loss(
    scene: &GeometricScene,
    base: &[Vec3],
    field: &OffsetField,
    chamfer: &ChamferSamples,
    weights: &LossWeights,
) -> Result<GeometricEvaluation> {
    check_len("scene vertices", scene.mesh.vertex_count(), base.len())?;
    let positions = apply_offsets(base, field)?;
    let displacements = field.displacements();
    let labels = scene.mesh.regions().labels();
    let n = positions.len();
    let mut terms = BTreeMap::new();

    let hair_branch = || -> Result<_> {
        let render = scene.render(&scene.hair_triangles, &positions)?;
        let (value, g) = squared_error_grad(render.occupancy(), scene.target_hair)?;
        let grad = if weights.lambda_hair > 0.0 {
            let upstream: Vec<f64> = g.iter().map(|g| weights.lambda_hair * g).collect();
            let size = scene.target_full.size();
            rasterize_triangles_grad(&scene.hair_triangles, &positions, &scene.camera, &scene.raster, size, &render, &upstream)?
        } else {
            vec![Vec3::zeros(); n]
        };
        Ok((render, value, grad))
    };
    let full_branch = || -> Result<_> {
        let render = scene.render(scene.mesh.triangles(), &positions)?;
        let (value, g) = squared_error_grad(render.occupancy(), scene.target_full)?;
        let mut upstream: Vec<f64> = g.iter().map(|g| weights.lambda_o * g).collect();
        let dice = if weights.lambda_seg > 0.0 {
            let (dice, g_dice) = dice_loss_grad(render.occupancy(), scene.target_full)?;
            for (u, g) in upstream.iter_mut().zip(g_dice) {
                *u += weights.lambda_seg * g;
            }
            Some(dice)
        } else {
            dice_loss(render.occupancy(), scene.target_full).ok()
        };
        let grad = if weights.lambda_o > 0.0 || weights.lambda_seg > 0.0 {
            let size = scene.target_full.size();
            rasterize_triangles_grad(scene.mesh.triangles(), &positions, &scene.camera, &scene.raster, size, &render, &upstream)?
        } else {
            vec![Vec3::zeros(); n]
        };
        Ok((render, value, dice, grad))
    };
    let (hair, full) = rayon::join(hair_branch, full_branch);
    let (hair_render, occ_hair, hair_grad) = hair?;
    let (full_render, occ_full, dice, full_grad) = full?;
    terms.insert(LossReport::OCCUPANCY_HAIR.to_string(), occ_hair);
    terms.insert(LossReport::OCCUPANCY_FULL.to_string(), occ_full);
    if let Some(dice) = dice {
        terms.insert(LossReport::SEGMENTATION.to_string(), dice);
    }

    let mut shared_grad = vec![Vec3::zeros(); n];
    if let Some((value, grad)) = chamfer_term(scene, &positions, chamfer, weights.lambda_chm)? {
        terms.insert(LossReport::CHAMFER.to_string(), value);
        shared_grad = grad;
    }
    let (lap, lap_grad) = laplacian_loss_grad(&displacements, &scene.adjacency)?;
    terms.insert(LossReport::LAPLACIAN.to_string(), lap);
    for (s, g) in shared_grad.iter_mut().zip(&lap_grad) {
        *s += weights.lambda_lap * g;
    }

    let hair_routed = field.coefficient_grad(&keep_rows(&hair_grad, labels, Region::Hair));
    let full_routed = field.coefficient_grad(&keep_rows(&full_grad, labels, Region::Neck));
    let shared = field.coefficient_grad(&shared_grad);
    let coefficient_grad: Vec<Vec3> = (0..n).map(|i| hair_routed[i] + full_routed[i] + shared[i]).collect();
    let routing = RoutingStats {
        face_ear: l1_on(&coefficient_grad, labels, Region::is_fixed),
        hair_term_on_neck: l1_on(&hair_routed, labels, |r| r == Region::Neck),
        full_term_on_hair: l1_on(&full_routed, labels, |r| r == Region::Hair),
    };
    let position_grad = (0..n).map(|i| hair_grad[i] + full_grad[i] + shared_grad[i]).collect();

    Ok(GeometricEvaluation {
        report: LossReport::weighted(terms, weights),
        coefficient_grad,
        position_grad,
        routing,
        render_hair: hair_render.into_occupancy(),
        render_full: full_render.into_occupancy(),
    })
}

/// Total loss with each silhouette term seeing the other region frozen.
///
/// The hair-silhouette term uses `live` on hair rows and `frozen` elsewhere;
/// the full-silhouette and Dice terms use `live` on neck rows only. The
/// gradient of this function with respect to `live`, taken at
/// `live == frozen`, is the routed gradient of [`total_geometric_loss`].
pub fn value_with_detached(
    scene: &GeometricScene,
    base: &[Vec3],
    live: &OffsetField,
    frozen: &OffsetField,
    chamfer: &ChamferSamples,
    weights: &LossWeights,
) -> Result<f64> {
    let live_pos = apply_offsets(base, live)?;
    let frozen_pos = apply_offsets(base, frozen)?;
    check_len("frozen offsets", live_pos.len(), frozen_pos.len())?;
    let labels = scene.mesh.regions().labels();
    let mix = |region: Region| -> Vec<Vec3> {
        (0..live_pos.len())
            .map(|i| if labels[i] == region { live_pos[i] } else { frozen_pos[i] })
            .collect()
    };
    let mut terms = BTreeMap::new();
    let hair = scene.render(&scene.hair_triangles, &mix(Region::Hair))?;
    terms.insert(LossReport::OCCUPANCY_HAIR.to_string(), squared_error_grad(hair.occupancy(), scene.target_hair)?.0);
    let full = scene.render(scene.mesh.triangles(), &mix(Region::Neck))?;
    terms.insert(LossReport::OCCUPANCY_FULL.to_string(), squared_error_grad(full.occupancy(), scene.target_full)?.0);
    if weights.lambda_seg > 0.0 {
        terms.insert(LossReport::SEGMENTATION.to_string(), dice_loss(full.occupancy(), scene.target_full)?);
    }
    if let Some((value, _)) = chamfer_term(scene, &live_pos, chamfer, 0.0)? {
        terms.insert(LossReport::CHAMFER.to_string(), value);
    }
    let (lap, _) = laplacian_loss_grad(&live.displacements(), &scene.adjacency)?;
    terms.insert(LossReport::LAPLACIAN.to_string(), lap);
    Ok(LossReport::weighted(terms, weights).total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RegionPartition;
    use crate::gradcheck::{assert_gradients_match, central_difference, flatten, unflatten};
    use crate::raster::ImageSize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        mesh: TriMesh,
        target_hair: SilhouetteImage,
        target_full: SilhouetteImage,
        field: OffsetField,
    }

    // hexagonal fan: centre is face, ring is hair/hair/ears/neck/neck/hair
    fn fixture(seed: u64) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vertices = vec![Vec3::new(0.0, 0.0, 0.3)];
        for k in 0..6 {
            let a = std::f64::consts::FRAC_PI_3 * k as f64 + rng.random_range(-0.1..0.1);
            let r = rng.random_range(0.5..0.7);
            vertices.push(Vec3::new(r * a.cos(), r * a.sin(), rng.random_range(-0.1..0.1)));
        }
        let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        use Region::*;
        let labels = vec![Face, Hair, Hair, Ears, Neck, Neck, Hair];
        let mesh = TriMesh::new(vertices, triangles, vec![[0.0; 2]; 7], RegionPartition::new(labels.clone())).unwrap();
        let camera = Camera::frontal(1.0, Vec2::zeros()).unwrap();
        let size = ImageSize::square(16).unwrap();
        let raster = RasterConfig { sigma: 5e-3, ..RasterConfig::default() };
        let shifted: Vec<Vec3> = mesh.vertices().iter().map(|v| v * 1.1 + Vec3::new(0.03, -0.02, 0.0)).collect();
        let target_hair = rasterize_triangles(&mesh.hair_render_triangles(), &shifted, &camera, &raster, size)
            .unwrap()
            .into_occupancy();
        let target_full = rasterize_triangles(mesh.triangles(), &shifted, &camera, &raster, size).unwrap().into_occupancy();
        let normals = (0..7)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize())
            .collect();
        let coeffs = (0..7).map(|_| Vec3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05))).collect();
        let field = OffsetField::zeros(normals, mesh.regions()).unwrap().with_coefficients(coeffs).unwrap();
        Fixture { mesh, target_hair, target_full, field }
    }

    fn scene(f: &Fixture) -> GeometricScene<'_> {
        let raster = RasterConfig { sigma: 5e-3, ..RasterConfig::default() };
        GeometricScene::new(&f.mesh, Camera::frontal(1.0, Vec2::zeros()).unwrap(), raster, &f.target_hair, &f.target_full).unwrap()
    }

    #[test]
    fn zero_weights_give_zero_total_and_gradient() {
        let f = fixture(0);
        let s = scene(&f);
        let chamfer = ChamferSamples::draw(&s, &apply_offsets(f.mesh.vertices(), &f.field).unwrap(), 1).unwrap();
        let e = total_geometric_loss(&s, f.mesh.vertices(), &f.field, &chamfer, &LossWeights::zero()).unwrap();
        assert_eq!(e.report.total, 0.0);
        assert!(e.coefficient_grad.iter().all(|g| *g == Vec3::zeros()));
        assert!(e.report.term(LossReport::OCCUPANCY_FULL).unwrap() > 0.0);
    }

    #[test]
    fn hair_only_weights_leave_neck_rows_zero() {
        let f = fixture(1);
        let s = scene(&f);
        let w = LossWeights { lambda_hair: 10.0, ..LossWeights::zero() };
        let e = total_geometric_loss(&s, f.mesh.vertices(), &f.field, &ChamferSamples::none(), &w).unwrap();
        for (g, r) in e.coefficient_grad.iter().zip(f.mesh.regions().labels()) {
            if *r == Region::Neck || r.is_fixed() {
                assert_eq!(*g, Vec3::zeros());
            }
        }
        assert!(e.coefficient_grad.iter().any(|g| g.norm() > 0.0));
        assert!(e.routing.is_clean());
    }

    #[test]
    fn report_total_matches_weighted_terms() {
        let f = fixture(2);
        let s = scene(&f);
        let chamfer = ChamferSamples::draw(&s, &apply_offsets(f.mesh.vertices(), &f.field).unwrap(), 3).unwrap();
        let w = LossWeights::with_segmentation();
        let e = total_geometric_loss(&s, f.mesh.vertices(), &f.field, &chamfer, &w).unwrap();
        let sum: f64 = e.report.terms.iter().map(|(k, v)| w.weight_of(k).unwrap() * v).sum();
        assert!((sum - e.report.total).abs() < 1e-9);
        assert_eq!(e.report.terms.len(), 5);
    }

    #[test]
    fn routed_gradient_matches_freeze_and_difference() {
        for seed in 0..5 {
            let f = fixture(seed);
            let s = scene(&f);
            let base = f.mesh.vertices();
            let chamfer = ChamferSamples::draw(&s, &apply_offsets(base, &f.field).unwrap(), seed).unwrap();
            assert!(!chamfer.visible().is_empty());
            let w = LossWeights::with_segmentation();
            let e = total_geometric_loss(&s, base, &f.field, &chamfer, &w).unwrap();
            let x0 = flatten(f.field.coefficients());
            let fd = central_difference(&x0, 1e-5, |x| {
                let live = f.field.clone().with_coefficients(unflatten(x)).unwrap();
                value_with_detached(&s, base, &live, &f.field, &chamfer, &w).unwrap()
            });
            assert_gradients_match(&flatten(&e.coefficient_grad), &fd, 1e-4);
            assert!(e.routing.is_clean());
        }
    }
}
