//! Conversion-matrix training: feature-matrix construction, the
//! cluster-mismatch cost and the particle swarm search.

pub mod feature;
pub mod matrix;
pub mod swarm;

pub use feature::{build_feature_matrix, feature_from_regions, FeatureMatrix, Rect, Region};
pub use matrix::{convert_pixels, load_matrix, save_matrix, ConversionMatrix};
pub use swarm::{
    conversion_cost, pso_search, reference_assignment, update_particle, Particle, PsoConfig, PsoOutcome,
};
