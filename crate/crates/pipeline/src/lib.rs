//! Batch computation over landmark sequences, backed by a content-addressed
//! on-disk cache.

pub mod bench;
pub mod cache;
pub mod config;
mod run;

pub use bench::{benchmark, compare_supersampling, match_prominent_features, min_edge_length, supersampled_diagram};
pub use cache::{Cache, Manifest};
pub use config::{ConfigFile, PipelineConfig};
pub use run::{
    compute_diagram_set, diagram_key, discover_sequences, matrix_key, run_pipeline, sequence_digest, DiagramSet,
    PipelineReport, SequenceError, Stats, Tally,
};
