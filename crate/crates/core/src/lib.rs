//! Free strict and involutive globular ω-categories at bounded truncation:
//! terms and their normal forms, the free-category monads, globular
//! collections with contractions, and contracted operads.

pub mod acceptance;
pub mod collections;
pub mod document;
pub mod error;
pub mod globular;
pub mod magma_oracle;
pub mod monad;
pub mod normalizer;
pub mod operads;
pub mod oracle;
pub mod pasting;
pub mod report;
pub mod term;

pub use error::{Error, Result};
