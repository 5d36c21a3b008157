//! Which finite abelian groups occur as groups of rational points on abelian
//! surfaces over `F_q` in the isogeny class of a given Weil polynomial.
//!
//! [`classify`] decides the question from the factorization of the Weil
//! polynomial and local polygon conditions; [`lattice`] checks the answer by
//! enumerating Frobenius-stable lattices and reading off `T/(1−F)T`.

pub mod abgroup;
pub mod classify;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod numeric;
pub mod polygon;
pub mod polynomial;

pub use abgroup::{parse_group, FiniteAbelianGroup, HodgeVector};
pub use classify::{decide_group, enumerate_groups, ClassificationResult, Rejection, Verdict};
pub use error::{Error, Result};
pub use numeric::{Integer, Rational};
pub use polynomial::{detect_shape, validate_weil, IntPolynomial, IsogenyShape, WeilPolynomial};
