use thiserror::Error;

use crate::perm::PeakSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid peak set: {0}")]
    InvalidPeakSet(String),

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("peak set {set} is not admissible: {reason}")]
    Inadmissible { set: PeakSet, reason: &'static str },

    #[error("the empty peak set is not allowed here")]
    EmptySet,

    #[error("antidifference anchor {anchor} differs from the polynomial center {center}")]
    AnchorMismatch { anchor: i64, center: i64 },

    #[error("unknown check {0:?}")]
    UnknownCheck(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("q = {q} is below max(S) = {max}")]
    LengthBelowMax { q: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
