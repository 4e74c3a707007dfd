use thiserror::Error;

use crate::sets::Window;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("window mismatch: {left} vs {right}")]
    WindowMismatch { left: Window, right: Window },
    #[error("source window {available} does not cover required window {needed}")]
    InsufficientWindow { needed: Window, available: Window },
    #[error("precision failure at n={n}: fractional part {frac:e} lies within the guard band of an arc endpoint")]
    Precision { n: i64, frac: f64 },
    #[error("window length {0} exceeds the 2^62 cap")]
    Range(i128),
    #[error("empty or inverted interval [{lo},{hi})")]
    EmptyInterval { lo: i64, hi: i64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expression has {0} distinct shifts; at most 20 are supported")]
    TooManyShifts(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error("k_{n} is ambiguous: value {value:e} lies within the guard band of an integer")]
    GuardBand { n: u64, value: f64 },
    #[error("prime index {n} is outside the sieved range (first {sieved} primes)")]
    PrimeIndexOutOfRange { n: u64, sieved: usize },
    #[error("index {n} is outside the explicit list of length {len}")]
    ExplicitOutOfRange { n: u64, len: usize },
    #[error("sequence is undefined at n={0}")]
    Domain(u64),
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("value at n={0} overflows 64-bit integers")]
    Overflow(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors surfaced by the drivers, which mix set and sequence computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("invalid argument: {0}")]
    Invalid(String),
}
