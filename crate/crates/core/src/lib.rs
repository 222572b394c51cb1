//! Coherence witnesses for block (projective) and POVM measurement references,
//! incoherence certification, and quantum Fisher information for phase
//! estimation with degenerate Hamiltonians.

pub mod cli;
pub mod error;
pub mod estimation;
pub mod format;
pub mod linalg;
pub mod measurements;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
