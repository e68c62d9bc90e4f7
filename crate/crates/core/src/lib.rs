//! Simulation-based Bayesian inference for edgewise mixture-of-mechanisms
//! network formation models.
//!
//! The crate simulates networks whose edges come from a weighted mixture of
//! growth rules (random, preferential, negative-preferential attachment) and
//! edge-conserving rewiring rules (triangle formation, disassortative and
//! preferential rewiring), then learns an amortized posterior over the
//! mechanism weights and event rates with a graph neural network feeding a
//! Dirichlet/Gamma mixture density head.

pub mod autodiff;
pub mod error;
pub mod generator;
pub mod graph;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod summaries;
pub mod validation;

pub use error::{Error, Result};
pub use generator::{grow_network, Prior, SimConfig, Theta};
pub use graph::Graph;
