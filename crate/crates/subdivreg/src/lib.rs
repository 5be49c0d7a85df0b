//! Convergence and Hölder-regularity analysis of stationary and
//! non-stationary subdivision schemes.
//!
//! The pipeline mirrors the matrix approach: measure how far each level mask
//! is from satisfying sum rules, build transition matrices over a finite
//! index set, restrict them to difference subspaces, and bound the joint
//! spectral radius of the limit-point family. Those ingredients combine into
//! convergence verdicts and Hölder exponent bounds.

pub mod cascade;
pub mod config;
pub mod error;
pub mod jsr;
pub mod lattice;
pub mod regularity;
pub mod report;
pub mod schemes;
pub mod symbol;
pub mod transition;

pub use error::{Error, Result};
