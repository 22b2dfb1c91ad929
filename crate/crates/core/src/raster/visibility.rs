use super::camera::{project, Camera};
use super::image::ImageSize;
use super::soft::{contains, signed_area2};
use crate::error::{check_len, Result};
use crate::geometry::{compute_vertex_normals, TriMesh, Vec2, Vec3};

/// Depth slack of the z-buffer test, camera-frame units.
pub const DEPTH_TOLERANCE: f64 = 1e-4;

struct DepthBuffer {
    depth: Vec<f64>,
    owner: Vec<Option<usize>>,
}

/// Hard z-buffer over all triangles; larger depth is closer to the viewer.
fn depth_buffer(triangles: &[[usize; 3]], ndc: &[Vec2], depth: &[f64], size: ImageSize) -> DepthBuffer {
    let mut buf = DepthBuffer {
        depth: vec![f64::NEG_INFINITY; size.pixel_count()],
        owner: vec![None; size.pixel_count()],
    };
    for (f, tri) in triangles.iter().enumerate() {
        let v = tri.map(|i| ndc[i]);
        let area = signed_area2(&v);
        if area == 0.0 {
            continue;
        }
        let (x0, y1) = size.to_pixel(&Vec2::new(
            v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
            v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
        ));
        let (x1, y0) = size.to_pixel(&Vec2::new(
            v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max),
            v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
        ));
        let r0 = y0.ceil().max(0.0) as usize;
        let r1 = y1.floor().min(size.height as f64 - 1.0);
        let c0 = x0.ceil().max(0.0) as usize;
        let c1 = x1.floor().min(size.width as f64 - 1.0);
        if r1 < 0.0 || c1 < 0.0 {
            continue;
        }
        for r in r0..=r1 as usize {
            for c in c0..=c1 as usize {
                let p = size.pixel_center(r, c);
                if !contains(&v, &p) {
                    continue;
                }
                let z = plane_depth(&v, tri, depth, &p);
                let idx = r * size.width + c;
                if z > buf.depth[idx] {
                    buf.depth[idx] = z;
                    buf.owner[idx] = Some(f);
                }
            }
        }
    }
    buf
}

/// Depth of the triangle's plane at NDC point `p` (barycentric extrapolation).
fn plane_depth(v: &[Vec2; 3], tri: &[usize; 3], depth: &[f64], p: &Vec2) -> f64 {
    let area = signed_area2(v);
    let w1 = signed_area2(&[v[0], *p, v[2]]) / area;
    let w2 = signed_area2(&[v[0], v[1], *p]) / area;
    let w0 = 1.0 - w1 - w2;
    w0 * depth[tri[0]] + w1 * depth[tri[1]] + w2 * depth[tri[2]]
}

/// Vertices seen by the camera at the given resolution.
///
/// A vertex is visible when it belongs to a front-facing (counter-clockwise
/// in NDC) triangle, its area-weighted normal points towards the viewer, and
/// it is not behind the z-buffer surface at its nearest pixel: either the
/// winning triangle there contains the vertex, or that triangle's plane,
/// evaluated at the vertex, is no more than [`DEPTH_TOLERANCE`] in front of
/// it. Uncovered pixels do not occlude.
pub fn visible_vertices(
    mesh: &TriMesh,
    positions: &[Vec3],
    camera: &Camera,
    size: ImageSize,
) -> Result<Vec<bool>> {
    check_len("vertex positions", mesh.vertex_count(), positions.len())?;
    let proj = project(camera, positions);
    let mut front = vec![false; positions.len()];
    for tri in mesh.triangles() {
        if signed_area2(&tri.map(|i| proj.ndc[i])) > 0.0 {
            for &i in tri {
                front[i] = true;
            }
        }
    }
    let normals = compute_vertex_normals(mesh, positions)?;
    let buf = depth_buffer(mesh.triangles(), &proj.ndc, &proj.depth, size);
    Ok((0..positions.len())
        .map(|i| {
            if !front[i] || (camera.rotation() * normals[i])[2] <= 0.0 {
                return false;
            }
            let (r, c) = size.nearest_pixel(&proj.ndc[i]);
            match buf.owner[r * size.width + c] {
                None => true,
                Some(f) => {
                    let tri = &mesh.triangles()[f];
                    tri.contains(&i) || {
                        let v = tri.map(|k| proj.ndc[k]);
                        plane_depth(&v, tri, &proj.depth, &proj.ndc[i]) <= proj.depth[i] + DEPTH_TOLERANCE
                    }
                }
            }
        })
        .collect())
}
