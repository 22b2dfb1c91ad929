use super::{TriMesh, Vec3};
use crate::error::{check_len, Result};

const DEGENERATE_AREA: f64 = 1e-12;
const MIN_NORMAL_NORM: f64 = 1e-12;

/// Area-weighted vertex normals of `mesh` evaluated at `positions`.
///
/// Triangles with area below 1e-12 contribute nothing; vertices whose summed
/// normal vanishes (isolated or fully degenerate neighbourhoods) get +z.
pub fn compute_vertex_normals(mesh: &TriMesh, positions: &[Vec3]) -> Result<Vec<Vec3>> {
    check_len("vertex positions", mesh.vertex_count(), positions.len())?;
    let mut sums = vec![Vec3::zeros(); positions.len()];
    for tri in mesh.triangles() {
        let [a, b, c] = tri.map(|i| positions[i]);
        // |cross| is twice the area, so the raw cross product is already area weighted.
        let cross = (b - a).cross(&(c - a));
        if 0.5 * cross.norm() < DEGENERATE_AREA {
            continue;
        }
        for &i in tri {
            sums[i] += cross;
        }
    }
    Ok(sums
        .into_iter()
        .map(|s| {
            let norm = s.norm();
            if norm < MIN_NORMAL_NORM {
                Vec3::z()
            } else {
                s / norm
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{icosahedron, Region};
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;

    fn mesh(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> TriMesh {
        TriMesh::with_uniform_region(vertices, triangles, Region::Hair).unwrap()
    }

    #[test]
    fn tetrahedron_apex_points_away_from_base() {
        let h = (2.0f64 / 3.0).sqrt();
        let base = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-0.5, 3f64.sqrt() / 2.0, 0.0),
            Vec3::new(-0.5, -(3f64.sqrt()) / 2.0, 0.0),
        ];
        let apex = Vec3::new(0.0, 0.0, h * 3f64.sqrt());
        let verts = vec![base[0], base[1], base[2], apex];
        // outward-facing: base seen from -z, sides from outside
        let m = mesh(verts.clone(), vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]]);
        let n = compute_vertex_normals(&m, &verts).unwrap();
        assert!((n[3] - Vec3::z()).norm() < 1e-12, "{:?}", n[3]);
    }

    #[test]
    fn flat_square_has_up_normals() {
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let m = mesh(verts.clone(), vec![[0, 1, 2], [0, 2, 3]]);
        for n in compute_vertex_normals(&m, &verts).unwrap() {
            assert_eq!(n, Vec3::z());
        }
    }

    #[test]
    fn icosahedron_normals_are_radial() {
        let ico = icosahedron();
        let n = compute_vertex_normals(&ico, ico.vertices()).unwrap();
        for (p, n) in ico.vertices().iter().zip(&n) {
            assert!((p.normalize() - n).norm() < 1e-6);
        }
    }

    #[test]
    fn isolated_and_degenerate_vertices_fall_back_to_z() {
        let verts = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(5.0, 5.0, 5.0),
        ];
        let m = mesh(verts.clone(), vec![[0, 1, 2]]);
        let n = compute_vertex_normals(&m, &verts).unwrap();
        assert!(n.iter().all(|v| *v == Vec3::z()));
    }

    proptest! {
        #[test]
        fn normals_rotate_with_the_mesh(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0, angle in -3.0f64..3.0) {
            let ico = icosahedron();
            let verts: Vec<Vec3> = ico
                .vertices()
                .iter()
                .enumerate()
                .map(|(i, v)| v * (1.0 + 0.05 * (i as f64).sin()))
                .collect();
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(ax, ay, az)), angle);
            let rotated: Vec<Vec3> = verts.iter().map(|v| rot * v).collect();
            let n0 = compute_vertex_normals(&ico, &verts).unwrap();
            let n1 = compute_vertex_normals(&ico, &rotated).unwrap();
            for (a, b) in n0.iter().zip(&n1) {
                prop_assert!((rot * a - b).norm() < 1e-6);
            }
        }
    }
}
