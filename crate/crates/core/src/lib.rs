//! Semantic networks of emotion words built from pairwise ratings, and
//! their community structure under Markov-chain modular decomposition.
//!
//! Pipeline: [`ingest`] parses and filters rating sessions and aggregates
//! them into a [`graph::SemanticNetwork`]; [`graph`] derives the PageRank
//! walk; [`mdmc`] decomposes its stationary distribution into communities;
//! [`metrics`], [`stats`] and [`mds`] compare and lay out the results.

pub mod error;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod lexicon;
pub mod matrix;
pub mod mdmc;
pub mod mds;
pub mod metrics;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
