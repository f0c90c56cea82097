//! Genetic programming for binary classification.
//!
//! Programs are trees over scalar/vector primitives. Runs can select their
//! best-of-run individual on the training set or on a held-out validation
//! set, with or without lexicographic parsimony pressure, and are driven
//! through stratified k-fold cross-validation by the [`experiment`] module.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod evolution;
pub mod experiment;
pub mod primitives;
pub mod sample;
pub mod selection;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
pub use primitives::{Primitive, Value};
pub use sample::{Class, Sample, SampleSet};
pub use tree::ProgramTree;
