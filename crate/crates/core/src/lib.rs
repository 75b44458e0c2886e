//! Decision procedures for k-positive Hankel matrices and k-hyponormal
//! weighted shifts.
//!
//! The crate is organised bottom-up:
//!
//! - [`numkit`]: exact-rational and float scalar backends, fraction-free
//!   determinants, semidefiniteness tests, quadratic and Vandermonde solvers.
//! - [`hankel`]: moment sequences, Hankel blocks, k-positivity verdicts and
//!   determinant tables built by Desnanot–Jacobi condensation.
//! - [`shifts`]: weights ↔ moments, the hyponormality ladder and flatness.
//! - [`measures`]: finitely atomic measures, recursive generation and atom
//!   recovery.
//! - [`perturbation`]: rank-one perturbations `γ'` and the intervals `I^k` of
//!   admissible scales `t`.
//!
//! Every public operation is generic over [`numkit::Scalar`]; use
//! [`numkit::Rational`] for certified answers and `f64` for speed.

pub mod error;
pub mod hankel;
pub mod measures;
pub mod numkit;
pub mod perturbation;
pub mod shifts;

pub use error::{Error, Result};
