use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{apply_offsets, compute_iou, AdamState, OffsetField};
use crate::error::{check_len, Error, Result};
use crate::geometry::{compute_vertex_normals, TriMesh, Vec3};
use crate::gradcheck::flatten;
use crate::loss::{step_seed, total_geometric_loss, ChamferSamples, GeometricScene, LossReport, LossWeights, RoutingStats};
use crate::model::{PoseParams, SkinnedBlendshapeModel};
use crate::raster::{Camera, ImageSize, RasterConfig, SilhouetteImage};

/// Settings of one offset fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub weights: LossWeights,
    pub iterations: usize,
    pub image_size: ImageSize,
    pub raster: RasterConfig,
    pub seed: u64,
    pub optimize_shape: bool,
    pub learning_rate: f64,
    pub shape_learning_rate: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            weights: LossWeights::geometric(),
            iterations: 500,
            image_size: ImageSize { height: 128, width: 128 },
            raster: RasterConfig::default(),
            seed: 0,
            optimize_shape: false,
            learning_rate: 5e-3,
            shape_learning_rate: 1e-3,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.raster.validate()?;
        ImageSize::new(self.image_size.height, self.image_size.width)?;
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        for (name, lr) in [("learning_rate", self.learning_rate), ("shape_learning_rate", self.shape_learning_rate)] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {lr}")));
            }
        }
        Ok(())
    }
}

/// Target silhouettes of one instance.
#[derive(Clone, Copy, Debug)]
pub struct FitTargets<'a> {
    pub full: &'a SilhouetteImage,
    pub hair: &'a SilhouetteImage,
}

/// Result of [`fit`].
#[derive(Clone, Debug)]
pub struct FitResult {
    pub field: OffsetField,
    /// One report per optimiser step plus one for the final field.
    pub trace: Vec<LossReport>,
    /// Routing leakage summed over every evaluation.
    pub routing: RoutingStats,
    /// Final parameters; only `shape` changes, and only with `optimize_shape`.
    pub params: PoseParams,
    /// Offset mesh vertices at the final field.
    pub vertices: Vec<Vec3>,
    pub render_full: SilhouetteImage,
    pub render_hair: SilhouetteImage,
}

impl FitResult {
    pub fn initial_loss(&self) -> f64 {
        self.trace.first().map_or(f64::NAN, |r| r.total)
    }

    pub fn final_loss(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.total)
    }

    pub fn iou_full(&self, target: &SilhouetteImage) -> Result<f64> {
        compute_iou(&self.render_full, target, 0.5)
    }

    pub fn iou_hair(&self, target: &SilhouetteImage) -> Result<f64> {
        compute_iou(&self.render_hair, target, 0.5)
    }
}

/// Fits per-vertex normal offsets so the rendered silhouettes of
/// `mesh` (posed by `model` and `params`) match `targets`.
pub fn fit(
    mesh: &TriMesh,
    model: &SkinnedBlendshapeModel,
    params: &PoseParams,
    targets: FitTargets,
    camera: &Camera,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    params.validate(model)?;
    check_len("model vertices", mesh.vertex_count(), model.vertex_count())?;
    targets.hair.same_size(targets.full)?;
    if targets.full.size() != config.image_size {
        return Err(Error::InvalidArgument(format!(
            "target masks are {}x{} but image_size is {}x{}",
            targets.full.height(),
            targets.full.width(),
            config.image_size.height,
            config.image_size.width
        )));
    }
    let outside = targets
        .hair
        .values()
        .iter()
        .zip(targets.full.values())
        .filter(|(h, f)| **h > **f + 1.0 / 255.0)
        .count();
    if outside > 0 {
        warn!("{outside} hair-mask pixels exceed the full mask");
    }

    let mut params = params.clone();
    let mut v_t = model.reconstruct(&params)?;
    let normals = compute_vertex_normals(mesh, &v_t)?;
    let mut field = OffsetField::zeros(normals, mesh.regions())?;
    let scene = GeometricScene::new(mesh, *camera, config.raster, targets.hair, targets.full)?;
    let mut adam = AdamState::without_momentum(3 * mesh.vertex_count(), config.learning_rate);
    let mut shape_adam = AdamState::without_momentum(model.shape_dim(), config.shape_learning_rate);
    let mut trace = Vec::with_capacity(config.iterations + 1);
    let mut routing = RoutingStats::default();

    for step in 0..=config.iterations {
        let positions = apply_offsets(&v_t, &field)?;
        let chamfer = if config.weights.lambda_chm > 0.0 {
            ChamferSamples::draw(&scene, &positions, step_seed(config.seed, step))?
        } else {
            ChamferSamples::none()
        };
        let eval = total_geometric_loss(&scene, &v_t, &field, &chamfer, &config.weights)?;
        if !eval.report.total.is_finite() {
            return Err(Error::Diverged {
                step,
                reason: "non-finite loss".into(),
            });
        }
        routing.accumulate(&eval.routing);
        if step % 50 == 0 || step == config.iterations {
            debug!("step {step}: loss {:.6e}", eval.report.total);
        }
        trace.push(eval.report);
        if step == config.iterations {
            return Ok(FitResult {
                field,
                trace,
                routing,
                params,
                vertices: positions,
                render_full: eval.render_full,
                render_hair: eval.render_hair,
            });
        }

        let mut m = flatten(field.coefficients());
        adam.step(&mut m, &flatten(&eval.coefficient_grad)).map_err(|e| at_step(e, step))?;
        for (c, chunk) in field.coefficients_mut().iter_mut().zip(m.chunks_exact(3)) {
            *c = Vec3::new(chunk[0], chunk[1], chunk[2]);
        }
        field.mask_fixed();

        if config.optimize_shape && model.shape_dim() > 0 {
            let (g_shape, _) = model.reconstruct_vjp(&params, &eval.position_grad)?;
            shape_adam.step(&mut params.shape, &g_shape).map_err(|e| at_step(e, step))?;
            v_t = model.reconstruct(&params)?;
        }
    }
    unreachable!("the loop returns on its last iteration")
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::Diverged { reason, .. } => Error::Diverged { step, reason },
        other => other,
    }
}
