//! Topological signatures of facial landmark sequences.
//!
//! Poses become Rips filtrations, either over landmark points (metric) or
//! over connectivity segments (non-metric); their H0/H1 diagrams are compared
//! with bottleneck and 1-Wasserstein distances, and the resulting
//! dissimilarity matrices are embedded for inspection.

pub mod embedding;
pub mod error;
pub mod geometry;
pub mod landmarks;
pub mod matrix;
pub mod metrics;
pub mod persistence;
pub mod synthetic;

pub use error::{Error, Result};
