//! Exact weighted first-order model counting (WFOMC) for the two-variable
//! fragment extended with counting quantifiers, cardinality constraints and a
//! linear order axiom, plus a Markov Logic Network inference layer.
//!
//! The counting core is an incremental dynamic program over partitioning
//! vectors of valid cells; a linear order is handled by computing the count
//! for one fixed domain ordering and multiplying by n!. Cardinality
//! constraints and counting quantifiers are enforced by running the engine
//! with symbolic weights and extracting polynomial coefficients. All
//! arithmetic is exact.

pub mod algebra;
mod error;
pub mod logic;

pub mod kernel;
pub mod oracle;
pub mod transform;

pub mod engine;
pub mod mln;
pub mod selfcheck;

pub use error::{Error, Result};
