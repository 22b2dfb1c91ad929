//! Soft silhouette rasterization and its adjoint.
//!
//! Every triangle `f` influences pixel centre `p` through
//! `D_f(p) = sigmoid(sign(p, f) * d(p, f)^2 / sigma)`, where `d` is the 2D
//! distance to the triangle boundary and the sign is positive inside. The
//! occupancy is `O(p) = 1 - prod_f (1 - D_f(p))`, accumulated as a sum of
//! `log(1 - D_f)` with `1 - D_f >= epsilon`.

use serde::{Deserialize, Serialize};

use super::camera::{project, project_vjp, Camera};
use super::image::{ImageSize, SilhouetteImage};
use crate::error::{check_len, Error, Result};
use crate::geometry::{TriMesh, Vec2, Vec3};

/// Pixels whose squared distance exceeds `CULL_EXPONENT * sigma` from a
/// triangle's bounding box are skipped: their influence is below 5e-18.
const CULL_EXPONENT: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterConfig {
    /// Sharpness of the sigmoid, in squared NDC units.
    pub sigma: f64,
    /// Lower clamp on `1 - D_f` for the log-space product.
    pub epsilon: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-4,
            epsilon: 1e-7,
        }
    }
}

impl RasterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "raster sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "raster epsilon must lie in (0, 0.5), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn cull_radius(&self) -> f64 {
        (CULL_EXPONENT * self.sigma).sqrt()
    }
}

/// Forward result kept for the adjoint pass.
#[derive(Clone, Debug)]
pub struct SoftRender {
    occupancy: SilhouetteImage,
    /// Per-pixel `sum_f log(1 - D_f)`.
    log_empty: Vec<f64>,
}

impl SoftRender {
    pub fn occupancy(&self) -> &SilhouetteImage {
        &self.occupancy
    }

    pub fn into_occupancy(self) -> SilhouetteImage {
        self.occupancy
    }
}

/// Nearest boundary point of a triangle to a pixel centre.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BoundaryHit {
    pub d2: f64,
    /// Edge index: 0 = (v0, v1), 1 = (v1, v2), 2 = (v2, v0).
    pub edge: usize,
    /// Position of the closest point along the edge, in `[0, 1]`.
    pub t: f64,
    /// `p - closest`.
    pub diff: Vec2,
}

fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Twice the signed area; positive for counter-clockwise triangles.
pub(crate) fn signed_area2(v: &[Vec2; 3]) -> f64 {
    cross2(&(v[1] - v[0]), &(v[2] - v[0]))
}

pub(crate) fn contains(v: &[Vec2; 3], p: &Vec2) -> bool {
    let area = signed_area2(v);
    if area == 0.0 {
        return false;
    }
    let e = [
        cross2(&(v[1] - v[0]), &(p - v[0])),
        cross2(&(v[2] - v[1]), &(p - v[1])),
        cross2(&(v[0] - v[2]), &(p - v[2])),
    ];
    if area > 0.0 {
        e.iter().all(|&x| x >= 0.0)
    } else {
        e.iter().all(|&x| x <= 0.0)
    }
}

/// Ties between edges resolve to the lowest edge index.
pub(crate) fn nearest_boundary(v: &[Vec2; 3], p: &Vec2) -> BoundaryHit {
    let mut best: Option<BoundaryHit> = None;
    for edge in 0..3 {
        let a = v[edge];
        let b = v[(edge + 1) % 3];
        let ab = b - a;
        let len2 = ab.norm_squared();
        let t = if len2 > 0.0 {
            ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let diff = p - (a + t * ab);
        let d2 = diff.norm_squared();
        if best.is_none_or(|b| d2 < b.d2) {
            best = Some(BoundaryHit { d2, edge, t, diff });
        }
    }
    best.expect("three edges")
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Signed, scaled squared distance `sign * d^2 / sigma` of pixel `p`.
fn influence_logit(v: &[Vec2; 3], p: &Vec2, sigma: f64) -> (f64, f64, BoundaryHit) {
    let hit = nearest_boundary(v, p);
    let sign = if contains(v, p) { 1.0 } else { -1.0 };
    (sign * hit.d2 / sigma, sign, hit)
}

/// Pixel rectangle `(rows, cols)` that can receive influence from `v`.
fn pixel_window(
    v: &[Vec2; 3],
    size: ImageSize,
    radius: f64,
) -> Option<(std::ops::Range<usize>, std::ops::Range<usize>)> {
    let min_x = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - radius;
    let max_x = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + radius;
    let min_y = v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min) - radius;
    let max_y = v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max) + radius;
    let (c0, r1) = size.to_pixel(&Vec2::new(min_x, min_y));
    let (c1, r0) = size.to_pixel(&Vec2::new(max_x, max_y));
    let clamp_range = |lo: f64, hi: f64, n: usize| {
        let lo = lo.ceil().max(0.0);
        let hi = hi.floor().min(n as f64 - 1.0);
        (lo <= hi).then(|| lo as usize..hi as usize + 1)
    };
    Some((
        clamp_range(r0, r1, size.height)?,
        clamp_range(c0, c1, size.width)?,
    ))
}

fn check_inputs(triangles: &[[usize; 3]], points: &[Vec2], config: &RasterConfig) -> Result<()> {
    config.validate()?;
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::NonFinite("projected positions"));
    }
    if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= points.len())) {
        return Err(Error::InvalidMesh(format!(
            "triangle {t:?} references a missing vertex ({} vertices)",
            points.len()
        )));
    }
    Ok(())
}

fn corners(points: &[Vec2], tri: &[usize; 3]) -> [Vec2; 3] {
    tri.map(|i| points[i])
}

/// Soft silhouette of `triangles` over NDC `points`.
pub fn rasterize_projected(
    triangles: &[[usize; 3]],
    points: &[Vec2],
    size: ImageSize,
    config: &RasterConfig,
) -> Result<SoftRender> {
    check_inputs(triangles, points, config)?;
    let log_eps = config.epsilon.ln();
    let mut log_empty = vec![0.0; size.pixel_count()];
    for tri in triangles {
        let v = corners(points, tri);
        let Some((rows, cols)) = pixel_window(&v, size, config.cull_radius()) else {
            continue;
        };
        for r in rows {
            for c in cols.clone() {
                let p = size.pixel_center(r, c);
                let (x, _, _) = influence_logit(&v, &p, config.sigma);
                log_empty[r * size.width + c] += (-softplus(x)).max(log_eps);
            }
        }
    }
    let values = log_empty.iter().map(|&s| 0.0 - s.exp_m1()).collect();
    Ok(SoftRender {
        occupancy: SilhouetteImage::new(size, values)?,
        log_empty,
    })
}

/// Gradient of `sum_p upstream[p] * O(p)` with respect to the NDC points.
///
/// The inside/outside sign is treated as locally constant.
pub fn rasterize_projected_grad(
    triangles: &[[usize; 3]],
    points: &[Vec2],
    size: ImageSize,
    config: &RasterConfig,
    render: &SoftRender,
    upstream: &[f64],
) -> Result<Vec<Vec2>> {
    check_inputs(triangles, points, config)?;
    check_len("upstream pixels", size.pixel_count(), upstream.len())?;
    check_len("rendered pixels", size.pixel_count(), render.log_empty.len())?;
    let log_eps = config.epsilon.ln();
    let mut grad = vec![Vec2::zeros(); points.len()];
    if upstream.iter().all(|&u| u == 0.0) {
        return Ok(grad);
    }
    for tri in triangles {
        let v = corners(points, tri);
        let Some((rows, cols)) = pixel_window(&v, size, config.cull_radius()) else {
            continue;
        };
        let mut local = [Vec2::zeros(); 3];
        for r in rows {
            for c in cols.clone() {
                let idx = r * size.width + c;
                let up = upstream[idx];
                if up == 0.0 {
                    continue;
                }
                let p = size.pixel_center(r, c);
                let (x, sign, hit) = influence_logit(&v, &p, config.sigma);
                if -softplus(x) < log_eps {
                    continue;
                }
                // dO/d(d^2) = exp(S) * sigmoid(x) * sign / sigma
                let coeff = up * render.log_empty[idx].exp() * sigmoid(x) * sign / config.sigma;
                let g = -2.0 * coeff * hit.diff;
                local[hit.edge] += (1.0 - hit.t) * g;
                local[(hit.edge + 1) % 3] += hit.t * g;
            }
        }
        for (k, &i) in tri.iter().enumerate() {
            grad[i] += local[k];
        }
    }
    Ok(grad)
}

/// Soft silhouette of a subset of triangles of a posed mesh.
pub fn rasterize_triangles(
    triangles: &[[usize; 3]],
    positions: &[Vec3],
    camera: &Camera,
    config: &RasterConfig,
    size: ImageSize,
) -> Result<SoftRender> {
    check_finite(positions)?;
    let projection = project(camera, positions);
    rasterize_projected(triangles, &projection.ndc, size, config)
}

/// Adjoint of [`rasterize_triangles`] with respect to world positions.
pub fn rasterize_triangles_grad(
    triangles: &[[usize; 3]],
    positions: &[Vec3],
    camera: &Camera,
    config: &RasterConfig,
    size: ImageSize,
    render: &SoftRender,
    upstream: &[f64],
) -> Result<Vec<Vec3>> {
    check_finite(positions)?;
    let projection = project(camera, positions);
    let g = rasterize_projected_grad(triangles, &projection.ndc, size, config, render, upstream)?;
    Ok(project_vjp(camera, &g))
}

/// Soft occupancy image of every triangle of `mesh` at `positions`.
pub fn rasterize_soft(
    mesh: &TriMesh,
    positions: &[Vec3],
    camera: &Camera,
    config: &RasterConfig,
    size: ImageSize,
) -> Result<SilhouetteImage> {
    check_len("vertex positions", mesh.vertex_count(), positions.len())?;
    Ok(rasterize_triangles(mesh.triangles(), positions, camera, config, size)?.into_occupancy())
}

/// `d(sum_p upstream[p] * O(p)) / d positions` for [`rasterize_soft`].
pub fn rasterize_soft_grad(
    mesh: &TriMesh,
    positions: &[Vec3],
    camera: &Camera,
    config: &RasterConfig,
    size: ImageSize,
    upstream: &[f64],
) -> Result<Vec<Vec3>> {
    check_len("vertex positions", mesh.vertex_count(), positions.len())?;
    let render = rasterize_triangles(mesh.triangles(), positions, camera, config, size)?;
    rasterize_triangles_grad(mesh.triangles(), positions, camera, config, size, &render, upstream)
}

fn check_finite(positions: &[Vec3]) -> Result<()> {
    if positions.iter().flat_map(|p| p.iter()).all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("vertex positions"))
    }
}

/// True when no pixel sits near a nearest-edge switch or the epsilon clamp.
///
/// At those configurations the adjoint of [`rasterize_projected_grad`] is
/// only a one-sided derivative, so finite-difference checks exclude them.
pub fn adjoint_is_smooth(tris: &[[usize; 3]], pts: &[Vec2], size: ImageSize, cfg: &RasterConfig) -> bool {
    let log_eps = cfg.epsilon.ln();
    for r in 0..size.height {
        for c in 0..size.width {
            let p = size.pixel_center(r, c);
            for t in tris {
                let v = t.map(|i| pts[i]);
                let mut d: Vec<(f64, Vec2)> = (0..3)
                    .map(|e| {
                        let (a, b) = (v[e], v[(e + 1) % 3]);
                        let ab = b - a;
                        let s = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
                        let q = a + s * ab;
                        ((p - q).norm(), q)
                    })
                    .collect();
                d.sort_by(|x, y| x.0.total_cmp(&y.0));
                // two different closest points at nearly equal distance
                if d[1].0 - d[0].0 < 1e-3 && (d[1].1 - d[0].1).norm() > 1e-9 {
                    return false;
                }
                let d = [d[0].0];
                let x = if contains(&v, &p) { d[0] * d[0] } else { -d[0] * d[0] } / cfg.sigma;
                if (-softplus(x) - log_eps).abs() < 0.5 {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
#[path = "soft_tests.rs"]
mod tests;
