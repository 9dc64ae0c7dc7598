//! Exact computations with finite probicategories: Day convolution and its
//! residuals, reflections of biclosed structure, localisation at a set of
//! 2-cells, and extension along dense functors. Every isomorphism the engine
//! asserts comes with an explicit witness.

pub mod calculus;
pub mod enrichment;
pub mod error;
pub mod extend;
pub mod fincat;
pub mod localise;
pub mod probicat;
pub mod reflect;
pub mod report;
mod search;

pub use error::{Error, Result};
