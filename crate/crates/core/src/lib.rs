//! Exact simulation and verification of photon-loss (amplitude damping) codes
//! under passive linear optics.
//!
//! The crate works on fixed-photon-number sectors of `N` bosonic modes:
//!
//! - [`fock`]: occupation-number bases, dense state vectors and ladder operators.
//! - [`linopt`]: mode unitaries, Hermitian generators and their lifts to Fock space
//!   (permanent formula and an independent matrix-exponential route).
//! - [`codes`]: code pairs `(|L>, |H>)`, the one-photon-loss correctability check and
//!   the `G` matrix.
//! - [`logic`]: code-preserving networks, induced logical gates, Bloch orbits,
//!   discrete group closure and the no-continuous-gates check.
//! - [`loss`]: the uniform amplitude damping channel, syndrome recovery and
//!   entanglement fidelity curves.
//! - [`cli`]: the `photonloss` command-line front end.
//!
//! Mode indices are zero-based throughout the API.

// `!(x < tol)` is used on purpose so that NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod codes;
mod error;
pub mod fock;
pub mod linalg;
pub mod linopt;
pub mod logic;
pub mod loss;
pub mod random;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
