//! Geometric objective terms with analytic gradients.

mod chamfer2d;
mod dice;
mod laplacian;
mod occupancy;
mod sampling;
mod total;
mod weights;

pub use chamfer2d::{chamfer2d_loss, chamfer2d_loss_grad};
pub use dice::{dice_loss, dice_loss_grad};
pub use laplacian::{laplacian_loss, laplacian_loss_grad};
pub use occupancy::{occupancy_loss, squared_error, squared_error_grad};
pub use sampling::{sample_mask_points, step_seed};
pub use total::{total_geometric_loss, value_with_detached, ChamferSamples, GeometricEvaluation, GeometricScene, RoutingStats};
pub use weights::{LossReport, LossWeights};
