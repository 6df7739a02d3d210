//! Numerical toolkit for sharp fractional trace-Sobolev inequalities.
//!
//! The crate evaluates the sharp constants of the fractional Sobolev, HLS,
//! trace, and trace-Sobolev inequalities, implements the underlying operators
//! (fractional Laplacian, Riesz potential, hyperplane trace) on periodic
//! grids, and verifies at desk scale that the closed-form extremizer families
//! attain the sharp constants while generic fields stay strictly below.

pub mod cli;
pub mod constants;
pub mod extremizers;
pub mod field;
pub mod operators;
pub mod optimize;
pub mod quadrature;
pub mod specfun;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the admissible parameter domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input field is degenerate for the requested quotient (zero norm etc).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A numerical procedure failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Extremizer fit could not locate a usable peak.
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
