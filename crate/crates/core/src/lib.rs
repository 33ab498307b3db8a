//! Monogenic Clifford-Gegenbauer-Jacobi and Clifford-Gauss-Gegenbauer-Jacobi
//! polynomials, their spheroidal wavelets, and a small 2-D Clifford CWT.
//!
//! The symbolic layer ([`terms`], [`families`]) is exact over the rationals;
//! the numeric layer ([`analysis`], [`cwt`]) is double precision and checked
//! against the dense algebra in [`clifford`].

pub mod analysis;
pub mod cli;
pub mod clifford;
pub mod cwt;
pub mod error;
pub mod families;
pub mod terms;

pub use error::{Error, Result};
