//! Corpus ingestion, language-model perplexity scoring and the scientometric
//! analysis pipelines built on top of them.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod lm;
pub mod synth;

pub use error::{CoreError, Result};
