//! Diagram distances and pose dissimilarity matrices.

mod dissimilarity;
mod distance;
pub mod matching;

pub use dissimilarity::{dissimilarity_matrix, FrameDiagrams, PoseDissimilarityMatrix, Provenance};
pub use distance::{bottleneck_distance, combined_distance, wasserstein1_distance, DistanceKind, Pair};
