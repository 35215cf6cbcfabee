//! Numerics for PT-symmetric non-Hermitian free-fermion chains.

pub mod edge;
pub mod entanglement;
pub mod error;
pub mod fits;
pub mod model;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use num_complex::Complex64;
