//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by construction, validation, and harness plumbing.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix dimension does not match its counterpart.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix failed the column-stochastic validation.
    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    /// A generator exceeded the unit operator-norm bound.
    #[error("generator is not a contraction: {0}")]
    NotContraction(String),

    /// A mass vector failed the probability-density validation.
    #[error("not a probability density: {0}")]
    NotDensity(String),

    /// A base point lies outside the driving system's domain.
    #[error("base point out of range: {0}")]
    OutOfRange(String),

    /// A fiber required by an operation is missing from a fiber table.
    #[error("missing fiber: {0}")]
    MissingFiber(String),

    /// Cylinder enumeration exceeded the configured budget.
    #[error("cylinder budget exceeded: {0} cylinders (cap {1})")]
    CylinderBudget(usize, usize),

    /// The operation is not defined for the given driving system.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A definition file (map family, matrix table) failed to parse.
    #[error("parse error at line {line}: {msg}")]
    FileFormat { line: usize, msg: String },

    /// An experiment config failed to parse.
    #[error("config error at line {line}, column {col}: {msg}")]
    Config { line: usize, col: usize, msg: String },

    /// Invalid argument or option value.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
