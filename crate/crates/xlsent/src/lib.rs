//! Cross-lingual sentiment analysis with bilingual embedding projections.
//!
//! The crate trains jointly optimized bilingual sentiment embedding
//! spaces for sentence-level and target-level classification, and ships
//! the projection baselines (least-squares mapping with CSLS retrieval,
//! pseudo-bilingual corpus generation, a linear classifier over projected
//! averages) plus the evaluation and corpus-analysis tooling used to
//! compare them.
//!
//! Start with the runnable programs under `examples/`; each one covers a
//! capability end to end on small synthetic data. The `xlsent` binary
//! exposes the same operations over files.

pub mod analysis;
pub mod blse;
pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod linalg;
pub mod mapping;
pub mod synthetic;
pub mod targeted;

pub use error::{Error, Result};
