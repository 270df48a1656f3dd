//! Polynomial and polynomial-matrix algebra over exact or tolerant coefficients.

pub mod canonical;
pub mod matrix;
pub mod poly;
pub mod scalar;

pub use canonical::{first_non_left_unimodular_subset, kronecker_hermite, CanonicalForm, Companion};
pub use matrix::{PolyMatrix, RowReduction};
pub use poly::Poly;
pub use scalar::{parse_rational, Mode, Rational, Real, Scalar, DEFAULT_EPS_SIG, DEFAULT_EPS_ZERO};
