//! Text corpus spatialization and scatterplot stability analysis.
//!
//! The pipeline runs corpus → embedding → layout → similarity metrics, and
//! the [`study`] module orchestrates stability experiments over grids of
//! those stages.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod layout;
pub mod matrix;
pub mod numfmt;
pub mod rng;
pub mod simmetrics;
pub mod stats;
pub mod study;

pub use error::{Error, Result};
