use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{read_bytes, read_json, write_bytes, write_json};
use crate::error::{Error, Result};
use crate::geometry::{Region, RegionPartition, TriMesh, Vec3};

/// Geometry read from an OBJ file.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjData {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// Per-vertex texture coordinates, zero where no corner references one.
    pub uv: Vec<[f64; 2]>,
}

/// Writes vertices, per-vertex texture coordinates and faces.
///
/// Coordinates are written at `f32` precision in shortest round-trip form.
pub fn write_obj(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x as f32, v.y as f32, v.z as f32);
    }
    for t in mesh.uv() {
        let _ = writeln!(s, "vt {} {}", t[0] as f32, t[1] as f32);
    }
    for f in mesh.triangles() {
        let [a, b, c] = f.map(|i| i + 1);
        let _ = writeln!(s, "f {a}/{a} {b}/{b} {c}/{c}");
    }
    write_bytes(path, s.as_bytes())
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        format: "OBJ",
        path: path.to_path_buf(),
        message: format!("line {line}: {}", message.into()),
    }
}

/// Reads `v`, `vt` and `f` records; polygons are fan-triangulated and other
/// records are ignored.
pub fn read_obj(path: &Path) -> Result<ObjData> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| format_err(path, 0, "not UTF-8"))?;
    let mut vertices = Vec::new();
    let mut texcoords: Vec<[f64; 2]> = Vec::new();
    let mut faces: Vec<Vec<(usize, Option<usize>)>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| format_err(path, line_no, "missing coordinate"))?
                .parse::<f64>()
                .map_err(|e| format_err(path, line_no, e.to_string()))
        };
        match parts.next() {
            Some("v") => vertices.push(Vec3::new(parse(parts.next())?, parse(parts.next())?, parse(parts.next())?)),
            Some("vt") => texcoords.push([parse(parts.next())?, parse(parts.next())?]),
            Some("f") => {
                let mut corners = Vec::new();
                for token in parts {
                    let mut fields = token.split('/');
                    let resolve = |s: &str, count: usize| -> Result<usize> {
                        let i: i64 = s.parse().map_err(|_| format_err(path, line_no, format!("bad index {s:?}")))?;
                        let idx = if i > 0 { i - 1 } else { count as i64 + i };
                        if i == 0 || idx < 0 || idx >= count as i64 {
                            return Err(format_err(path, line_no, format!("index {i} out of range")));
                        }
                        Ok(idx as usize)
                    };
                    let v = resolve(fields.next().unwrap_or(""), vertices.len())?;
                    let t = match fields.next() {
                        Some(s) if !s.is_empty() => Some(resolve(s, texcoords.len())?),
                        _ => None,
                    };
                    corners.push((v, t));
                }
                if corners.len() < 3 {
                    return Err(format_err(path, line_no, "face with fewer than 3 vertices"));
                }
                faces.push(corners);
            }
            _ => {}
        }
    }
    let mut uv = vec![[0.0; 2]; vertices.len()];
    let mut assigned = vec![false; vertices.len()];
    let mut triangles = Vec::new();
    for corners in &faces {
        for &(v, t) in corners {
            if let (Some(t), false) = (t, assigned[v]) {
                uv[v] = texcoords[t];
                assigned[v] = true;
            }
        }
        for k in 1..corners.len() - 1 {
            triangles.push([corners[0].0, corners[k].0, corners[k + 1].0]);
        }
    }
    Ok(ObjData { vertices, triangles, uv })
}

pub fn write_regions(path: &Path, regions: &RegionPartition) -> Result<()> {
    write_json(path, &regions.to_index_lists())
}

pub fn read_regions(path: &Path, vertex_count: usize) -> Result<RegionPartition> {
    let lists: BTreeMap<Region, Vec<usize>> = read_json(path)?;
    RegionPartition::from_index_lists(&lists, vertex_count)
}

/// Mesh from an OBJ file and an optional region sidecar; without one every
/// vertex is hair.
pub fn load_mesh(obj: &Path, regions: Option<&Path>) -> Result<TriMesh> {
    let data = read_obj(obj)?;
    let n = data.vertices.len();
    let regions = match regions {
        Some(p) => read_regions(p, n)?,
        None => RegionPartition::new(vec![Region::Hair; n]),
    };
    TriMesh::new(data.vertices, data.triangles, data.uv, regions)
}
