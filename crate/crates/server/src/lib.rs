//! Orchestration around `strata-core`: external-model clients with fixture
//! replay, the end-to-end extraction pipeline, a JSON document store, the
//! HTTP API and the `strata` command line.

pub mod api;
pub mod cli;
pub mod fixtures;
pub mod pipeline;
pub mod prompt;
pub mod services;
pub mod store;

pub use pipeline::{ingest_image, run_pipeline, run_pipeline_on_scene, PipelineOutput, PipelineReport};
pub use services::ServiceBundle;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
