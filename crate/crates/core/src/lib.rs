//! Peak polynomials of permutation peak sets.
//!
//! A permutation `π ∈ S_n` has a peak at index `i` when `π(i-1) < π(i) > π(i+1)`.
//! For a peak set `S`, the number of permutations of length `n` whose peak set
//! is exactly `S` equals `p_S(n) · 2^(n-|S|-1)` for an integer-valued
//! polynomial `p_S` of degree `max(S) - 1`.
//!
//! The crate is split into four layers:
//!
//! - [`perm`]: permutations, peak sets, admissibility and the brute-force
//!   enumeration oracle over `S_n`.
//! - [`intpoly`]: exact integer-valued polynomials stored in a binomial basis
//!   `Σ c_j C(x-k, j)`, with forward differences, recentering and difference
//!   tables.
//! - [`engine`]: the derived-set recursion for `p_S`, the count recursion on
//!   `|P_S(q)|`, and the insertion construction that realises it.
//! - [`verify`]: positivity, log-concavity, structural and count checks, plus
//!   parallel sweeps over every admissible set up to a bound.

pub mod engine;
mod error;
pub mod intpoly;
pub mod perm;
pub mod verify;

pub use engine::{DerivedPair, DerivedSets, InsertionCase, InsertionCases, PeakEngine};
pub use error::{Error, Result};
pub use intpoly::{BinomialPolynomial, DifferenceTable};
pub use perm::{EnumLimit, PeakSet, Permutation};
pub use verify::{Check, SweepSummary, VerificationReport, Verifier};
