//! Numerical toolkit for weighted Goldbach sums in arithmetic
//! progressions: exact sieve-based summation, Dirichlet characters,
//! Dirichlet L-function zeros, explicit-formula decompositions of the
//! summatory Goldbach function, and second moments of the Chebyshev
//! function in progressions.

pub mod accum;
pub mod arith;
pub mod chars;
pub mod error;
pub mod goldbach;
pub mod special;
pub mod moments;
pub mod zeros;

pub use error::{Error, Result};
