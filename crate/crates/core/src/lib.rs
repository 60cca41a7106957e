//! Exactly solvable XX spin lattice on a triangular grid.
//!
//! The couplings of the lattice are recurrence coefficients of bivariate dual-Hahn
//! polynomials, so its single-excitation eigenproblem is solved in closed form. The crate
//! evaluates those polynomials, builds the Hamiltonian, propagates single excitations both
//! analytically and through an independent Jacobi diagonalization, and certifies perfect
//! state transfer and fractional revival for the two rational parameter families on which
//! they occur.

pub mod bivariate;
pub mod dynamics;
pub mod error;
pub mod jacobi;
pub mod lattice;
pub mod params;
pub mod specfun;
pub mod summation;
pub mod transfer;
pub mod verify;

pub use dynamics::{AmplitudeGrid, Time};
pub use error::{Error, Result};
pub use lattice::Site;
pub use params::{ModelParams, Rational};
