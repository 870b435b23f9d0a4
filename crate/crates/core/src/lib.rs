//! Topic-aware ideological cascades: simulation, embedding inference and
//! evaluation.
//!
//! Nodes of a follower graph carry per-topic interests `theta` and polarities
//! `phi`. Items carry a topic mixture. An item spreads from `v` to a follower
//! `u` when `u` cares about a topic drawn from the item and both nodes lean
//! the same way on it. [`trainer`] recovers `theta` and `phi` from observed
//! cascades; [`eval`] measures how well the recovered embedding predicts
//! held-out propagations.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the usual double-precision instantiation.

pub mod cascade;
pub mod cli;
pub mod error;
pub mod eval;
pub mod generator;
pub mod graph;
pub mod io;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod trainer;

pub use cascade::{Activation, ActivationLog, CascadeExposures, ItemId};
pub use error::{Error, Result};
pub use graph::{DirectedGraph, NodeId};
pub use model::{EmbeddingTable, ExposurePrior, ItemTopics};
pub use scalar::Scalar;
pub use trainer::{TrainConfig, TrainExample};

/// Double-precision embedding table.
pub type Embedding = EmbeddingTable<f64>;
/// Single-precision embedding table.
pub type Embedding32 = EmbeddingTable<f32>;
/// Double-precision item topics.
pub type Topics = ItemTopics<f64>;
/// Single-precision item topics.
pub type Topics32 = ItemTopics<f32>;
