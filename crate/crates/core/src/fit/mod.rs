//! Per-instance offset fitting.

mod adam;
mod engine;
mod iou;
mod offsets;

pub use adam::{adam_step, AdamState};
pub use engine::{fit, FitConfig, FitResult, FitTargets};
pub use iou::compute_iou;
pub use offsets::{apply_offsets, OffsetField};
