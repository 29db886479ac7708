//! Exact computation of the symplectic embedding capacity function of
//! 4-dimensional ellipsoids into cubes.
//!
//! For a rational aspect ratio `a >= 1`, the library computes the infimum
//! `c(a)` of cube sizes `A` such that the ellipsoid `E(1,a)` symplectically
//! embeds into the cube `C(A)`, together with all of the machinery behind
//! that computation:
//!
//! - [`exactnum`]: arbitrary-precision rationals and exact arithmetic in a
//!   real quadratic extension `Q(sqrt(r))`; every comparison the library
//!   makes is decided exactly, never through floating point.
//! - [`weights`]: continued fractions and the weight expansion `w(a)`.
//! - [`pell`]: Pell and half-companion Pell numbers, the staircase
//!   parameters `alpha_n`, `beta_n`, the convergents of `sigma^2` and the
//!   named exceptional-class constructors.
//! - [`exclass`]: exceptional-class algebra in the `S^2 x S^2` and `CP^2`
//!   bases, Cremona moves and full reduction to `(0; -1)`.
//! - [`ech`]: ECH capacity sequences of ellipsoids and polydiscs and the
//!   dominance test for embeddings.
//! - [`obstruction`]: the constraint functional `mu(d,e;m)(a)`, error-vector
//!   statistics and the analytic degree bounds that make searches finite.
//! - [`search`]: the restricted-partition and perturbation searches for
//!   obstructive classes at points and on intervals.
//! - [`capacity`]: the closed-form evaluator for `c(a)` and an independent
//!   obstruction-based evaluator used for cross-validation.
//! - [`cli`]: the command-line front end.

pub mod capacity;
pub mod cli;
pub mod ech;
pub mod exactnum;
pub mod exclass;
pub mod obstruction;
pub mod pell;
pub mod search;
pub mod weights;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the supported domain (e.g. `a < 1`).
    #[error("domain error: {0}")]
    Domain(String),
    /// Arithmetic between two quadratic extensions with different radicands.
    #[error("mixed radicands: sqrt({0}) vs sqrt({1})")]
    MixedRadicands(String, String),
    /// A basis change produced non-integer coefficients.
    #[error("non-integral class: {0}")]
    NonIntegralClass(String),
    /// An analytic degree bound is vacuous or its hypothesis fails.
    #[error("degree bound unavailable: {0}")]
    BoundUnavailable(String),
    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
