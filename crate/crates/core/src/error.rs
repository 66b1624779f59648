//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{clause} violated at {at}")]
    Clause { clause: String, at: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity mismatch for `{symbol}`: expected {expected}, found {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("not an ideal: {0}")]
    NotAnIdeal(String),
    #[error("objects belong to different parents")]
    ParentMismatch,
    #[error("datum not in variety: {0}")]
    DatumNotInVariety(String),
    #[error("candidate space of {bound} exceeds the budget of {budget}")]
    BudgetExceeded { bound: u128, budget: u128 },
    #[error("datum is not affine: {0}")]
    NotAffine(String),
    #[error("cocycle is not group-trivial")]
    NotGroupTrivial,
    #[error("square condition fails: {0}")]
    SquareFails(String),
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn clause(clause: &str, at: impl Into<String>) -> Self {
        Error::Clause { clause: clause.to_string(), at: at.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
