//! Scalar backends and small dense-matrix primitives.
//!
//! Everything here is generic over [`Scalar`], implemented for exact
//! [`Rational`] and for `f64`. In exact mode every decision (determinant
//! sign, semidefiniteness, root ordering) is certified; in float mode the
//! [`ToleranceContext`] decides what counts as zero.

mod interval;
mod matrix;
mod poly;
mod psd;
mod quadratic;
mod scalar;
mod tolerance;
mod vandermonde;

pub use interval::Interval;
pub use matrix::{char_poly, det_bareiss, determinant, solve_square, SymMatrix};
pub use poly::{real_roots_in, Poly, SturmChain};
pub use psd::{definiteness, is_pd, is_psd, min_eigenvalue, Definiteness};
pub use quadratic::{eval_quadratic, solve_quadratic, QuadraticRoots, Root};
pub use scalar::{parse_rational, Rational, Scalar};
pub use tolerance::{Sign, ToleranceContext};
pub use vandermonde::solve_vandermonde;
