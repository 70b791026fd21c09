//! Gap probabilities at the hard edge for products of complex Ginibre
//! matrices.
//!
//! The probability that no squared singular value of `X_M ⋯ X_1` falls in a
//! set `J` is computed three ways: as a Fredholm determinant of the
//! correlation kernel, by integrating the Hamiltonian equations that
//! govern the logarithmic derivative of that determinant, and by direct
//! sampling.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fredholm;
pub mod kernel;
pub mod montecarlo;
pub mod sigma;
pub mod specialfns;

pub use error::{GapError, Result};
pub use specialfns::{EnsembleSpec, QRoute};
