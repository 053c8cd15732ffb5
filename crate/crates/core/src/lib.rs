//! Asymmetric embeddings for directed attributed graphs.
//!
//! Two graph convolutional networks are trained against node labels, one
//! propagating along edges and one against them. Their last hidden layers
//! give every node a source and a target embedding, and the score of a
//! directed pair `(i, j)` is `<source(i), target(j)>`.
//!
//! - [`graph`]: the graph type and augmented adjacency
//! - [`linalg`]: dense and compressed sparse kernels
//! - [`model`]: the two-branch network, training, gradient checks, checkpoints
//! - [`embedding`]: embedding extraction, similarity and top-k ranking
//! - [`classifier`]: multinomial logistic regression on embeddings
//! - [`evaluation`]: metrics, edge splits, protocols and reports
//! - [`data_io`]: dataset manifests, loaders, synthetic graphs, embedding files

pub mod classifier;
pub mod data_io;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
