use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{check_len, Error, Result};

/// Semantic label of a vertex on the head template.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Face,
    Ears,
    Hair,
    Neck,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Face, Region::Ears, Region::Hair, Region::Neck];

    pub fn name(self) -> &'static str {
        match self {
            Region::Face => "face",
            Region::Ears => "ears",
            Region::Hair => "hair",
            Region::Neck => "neck",
        }
    }

    /// Face and ear vertices keep the parametric geometry; they never move.
    pub fn is_fixed(self) -> bool {
        matches!(self, Region::Face | Region::Ears)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "face" => Ok(Region::Face),
            "ears" => Ok(Region::Ears),
            "hair" => Ok(Region::Hair),
            "neck" => Ok(Region::Neck),
            other => Err(Error::InvalidArgument(format!("unknown region '{other}'"))),
        }
    }
}

/// Total, disjoint assignment of every vertex to one [`Region`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionPartition {
    labels: Vec<Region>,
}

impl RegionPartition {
    pub fn new(labels: Vec<Region>) -> Self {
        Self { labels }
    }

    /// Build from the sidecar form `region name -> vertex indices`.
    ///
    /// Every vertex in `0..vertex_count` must be listed exactly once.
    pub fn from_index_lists(map: &BTreeMap<Region, Vec<usize>>, vertex_count: usize) -> Result<Self> {
        let mut labels: Vec<Option<Region>> = vec![None; vertex_count];
        for (&region, indices) in map {
            for &i in indices {
                let slot = labels.get_mut(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: vertex_count,
                })?;
                if let Some(prev) = slot {
                    return Err(Error::InvalidMesh(format!(
                        "vertex {i} assigned to both {prev} and {region}"
                    )));
                }
                *slot = Some(region);
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::InvalidMesh(format!("vertex {i} has no region"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels })
    }

    pub fn to_index_lists(&self) -> BTreeMap<Region, Vec<usize>> {
        let mut map: BTreeMap<Region, Vec<usize>> =
            Region::ALL.iter().map(|&r| (r, Vec::new())).collect();
        for (i, &r) in self.labels.iter().enumerate() {
            map.entry(r).or_default().push(i);
        }
        map
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, vertex: usize) -> Region {
        self.labels[vertex]
    }

    pub fn labels(&self) -> &[Region] {
        &self.labels
    }

    pub fn indices(&self, region: Region) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == region)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, region: Region) -> usize {
        self.labels.iter().filter(|&&r| r == region).count()
    }
}

/// Triangle mesh with texture coordinates and a region partition.
///
/// Triangles are counter-clockwise when seen from their front side.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    uv: Vec<[f64; 2]>,
    regions: RegionPartition,
}

impl TriMesh {
    pub fn new(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        uv: Vec<[f64; 2]>,
        regions: RegionPartition,
    ) -> Result<Self> {
        let n = vertices.len();
        check_len("uv coordinates", n, uv.len())?;
        check_len("region labels", n, regions.len())?;
        for (f, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {f} references vertex {bad} but the mesh has {n} vertices"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {f} repeats a vertex: {tri:?}"
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            uv,
            regions,
        })
    }

    /// Mesh with zero uv coordinates and every vertex labelled `region`.
    pub fn with_uniform_region(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        region: Region,
    ) -> Result<Self> {
        let n = vertices.len();
        Self::new(
            vertices,
            triangles,
            vec![[0.0; 2]; n],
            RegionPartition::new(vec![region; n]),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn uv(&self) -> &[[f64; 2]] {
        &self.uv
    }

    pub fn regions(&self) -> &RegionPartition {
        &self.regions
    }

    /// Same topology, uv and regions with new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self> {
        check_len("vertex positions", self.vertices.len(), vertices.len())?;
        Ok(Self {
            vertices,
            ..self.clone()
        })
    }

    /// Triangles whose three vertices all satisfy `keep`.
    pub fn triangles_where(&self, keep: impl Fn(Region) -> bool) -> Vec<[usize; 3]> {
        self.triangles
            .iter()
            .filter(|t| t.iter().all(|&i| keep(self.regions.label(i))))
            .copied()
            .collect()
    }

    /// Render set for the hair silhouette: triangles fully inside hair, face or ears.
    pub fn hair_render_triangles(&self) -> Vec<[usize; 3]> {
        self.triangles_where(|r| r != Region::Neck)
    }
}
