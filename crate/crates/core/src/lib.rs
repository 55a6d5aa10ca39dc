//! Exact refutation certificates for rational sum-of-squares representations.
//!
//! Given a polynomial `f` (or a rational function `f/g`) and a set of
//! admissible denominator terms `T`, this crate decides one direction of the
//! question "is `f` a fraction of sums of squares whose denominator
//! polynomials only use terms from `T`?": it searches for an exact rational
//! moment vector `y` whose moment matrix is positive semidefinite while the
//! `f`-localizing matrix is negative definite. Such a `y` is a separating
//! hyperplane in the sense of the semidefinite Farkas lemma and *proves* that
//! no such representation exists, over any subfield of the reals.
//!
//! The pipeline is: assemble the block SDP ([`sdp`]), shrink the numerator
//! basis through Newton-polytope support reduction ([`newton`]), drive the
//! dual objective negative with a high-precision interior-point method
//! ([`solver`]), convert the numeric iterate to exact rationals
//! ([`rationalize`]), and re-check everything with exact rational linear
//! algebra ([`verify`]). Only certificates that survive the exact check are
//! ever returned.
//!
//! Floating point appears exclusively inside the solver; every other module
//! works with exact rationals.

pub mod float;
pub mod mat;
pub mod newton;
pub mod poly;
pub mod rationalize;
pub mod scalar;
pub mod sdp;
pub mod solver;
pub mod verify;

/// Exact rational scalar used everywhere outside the numerical solver.
pub type Rat = num_rational::BigRational;

pub use float::Mpf;
pub use poly::{Exponent, Polynomial, TermSet};
pub use rationalize::Certificate;
pub use sdp::{MomentVector, SdpInstance};
pub use verify::VerificationReport;

