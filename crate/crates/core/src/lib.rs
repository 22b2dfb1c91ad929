//! Silhouette-driven reconstruction of personalised head geometry.
//!
//! A skinned blendshape head model is deformed by per-vertex offsets along
//! the vertex normals. The offsets are optimised so that soft-rasterized
//! silhouettes match target masks, regularised by a Laplacian penalty and a
//! 2D Chamfer term, and fitted offset fields can be distilled into a compact
//! linear basis.

pub mod basis;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod gradcheck;
pub mod io;
pub mod loss;
pub mod model;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
