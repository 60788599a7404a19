//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented domain (nonpositive mass, odd
    /// cutoff, mismatched field pair, ...). Maps to CLI exit code 2.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was asked for a point outside its domain of validity
    /// (t < t0, t < t̂ for the adiabatic-impulse forms, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical tolerance could not be met (step-size underflow, method
    /// cross-check disagreement, ...). Maps to CLI exit code 3.
    #[error("tolerance failure: {0}")]
    Tolerance(String),

    /// A grid is too narrow or too coarse to hold the state it should carry.
    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
