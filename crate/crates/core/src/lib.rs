//! Numerics for large values of Hardy's Z-function.
//!
//! Modules cover Z(t) itself, a family of fast-decaying even test functions
//! and their Fourier transforms, prime tables, moment estimates of short
//! Dirichlet polynomials, and the parameter arithmetic behind the
//! resulting lower bounds for max |ζ(1/2+it)|.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds_engine;
pub mod dd;
pub mod error;
pub mod fourier_lab;
pub mod prime_tools;
pub mod quad;
pub mod roots;
pub mod selberg_moments;
pub mod test_functions;
pub mod zeta_eval;

pub use error::{Error, Result};
