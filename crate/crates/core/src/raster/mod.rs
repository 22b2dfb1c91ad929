//! Weak-perspective projection, soft silhouettes and visibility.

mod camera;
mod image;
mod soft;
mod visibility;

pub use camera::{project, project_vjp, Camera, Projection};
pub use image::{ImageSize, SilhouetteImage};
pub use soft::{
    adjoint_is_smooth, rasterize_projected, rasterize_projected_grad, rasterize_soft, rasterize_soft_grad,
    rasterize_triangles, rasterize_triangles_grad, RasterConfig, SoftRender,
};
pub use visibility::{visible_vertices, DEPTH_TOLERANCE};
