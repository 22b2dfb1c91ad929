//! Mesh representation, region partition, vertex normals and adjacency.

mod adjacency;
mod chamfer;
mod mesh;
mod normals;
mod primitives;

pub use adjacency::{build_adjacency, VertexAdjacency};
pub use chamfer::{chamfer3d, nearest_neighbor};
pub use mesh::{Region, RegionPartition, TriMesh};
pub use normals::compute_vertex_normals;
pub use primitives::{icosahedron, icosphere};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;
