//! Random dot product graphs end to end: latent position models, graph
//! sampling, adjacency spectral embedding, and diagnostics that check the
//! Gaussian limit behavior of the embedding residuals.
//!
//! The crate is organized in layers. [`model`] defines latent distributions
//! and samples graphs from them. [`linalg`] holds the symmetric eigensolvers
//! (a dense Jacobi reference and an iterative Lanczos for large operators),
//! Procrustes alignment, and a spectral-norm estimator. [`embed`] computes
//! the adjacency spectral embedding and its population counterpart and
//! audits concentration bounds. [`clt`] turns embeddings into scaled
//! residuals and compares them against their limiting normal laws. [`cluster`]
//! recovers blocks from embedded points. [`experiments`] wires everything
//! into reproducible experiment runs behind the `spectral-clt` binary.

pub mod clt;
pub mod cluster;
pub mod embed;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mat;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use mat::Mat;
