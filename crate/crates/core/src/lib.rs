//! Numerical toolkit for double-phase problems with variable exponents on a
//! truncated box: exponent fields and hypothesis checks, Luxemburg and
//! sum-space norms, double-phase potentials, the discrete energy and its
//! gradient, and critical-point solvers.

pub mod cli;
pub mod error;
pub mod exponents;
pub mod functional;
pub mod grid;
pub mod operator;
pub mod profile;
pub mod random;
mod serde_f64;
pub mod solvers;
pub mod spaces;

pub use error::{Error, Result};
