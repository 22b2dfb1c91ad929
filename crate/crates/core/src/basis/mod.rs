//! Low-rank linear bases of offset fields.

mod pca;
mod stats;

pub use pca::{edit_coefficient, field_to_vector, fit_pca, project, reconstruct_linear, vector_to_field, BasisRanks, LinearOffsetBasis};
pub use stats::{coefficient_statistics, OrderStatistics, QUANTILES};
