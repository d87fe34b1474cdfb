//! Clustering-oriented fine-tuning of short-text embeddings.
//!
//! Three representation pipelines share one numerical substrate:
//!
//! - [`autoencoder`]: a stacked dense autoencoder whose bottleneck is clustered with K-means;
//! - [`gae`]: a graph autoencoder over a cosine KNN text graph ([`graph`]);
//! - [`sca`]: autoencoder pretraining followed by soft-cluster-assignment
//!   self-training (Student-t assignments sharpened into a target distribution).
//!
//! [`metrics`] holds K-means, clustering accuracy and NMI; [`pipeline`] wires
//! everything into configurable, seeded experiment runs.

pub mod autoencoder;
pub mod checkpoint;
pub mod corpus;
pub mod error;
pub mod gae;
pub mod graph;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod sca;
pub mod synthetic;

pub use error::{Error, Result};
