//! Shared embedding space for songs, keywords, and images, learned from a
//! tripartite network, with image-to-song retrieval and evaluation.
//!
//! The pipeline: build a [`graph::TripartiteGraph`] from pre-tokenized
//! lyrics and an image manifest, [`embedding::train`] vertex vectors by
//! edge sampling with negative sampling, then [`retrieval::recommend`]
//! songs for an image feature by first finding the nearest known images in
//! feature space and then the nearest songs to those images in embedding
//! space.

pub mod embedding;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod numfmt;
pub mod retrieval;
pub mod sampler;

pub use embedding::{EmbeddingModel, Proximity, TrainConfig};
pub use error::{Error, Result};
pub use features::FeatureStore;
pub use graph::{TripartiteGraph, VertexId, VertexKind};
pub use retrieval::{RecommendationList, RetrievalConfig};
