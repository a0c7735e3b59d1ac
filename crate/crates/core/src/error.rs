use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FaqError> = std::result::Result<T, E>;

/// Position inside a query file, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum FaqError {
    #[error("unsupported carrier: {0}")]
    UnsupportedCarrier(String),

    #[error("unknown context `{0}`")]
    UnknownContext(String),

    #[error("unknown aggregate `{name}` for context `{context}`")]
    UnknownAggregate { name: String, context: String },

    #[error("duplicate key ({key}) in factor {factor}")]
    DuplicateKey { factor: String, key: String },

    #[error("arity mismatch in factor {factor}: expected {expected} columns, found {found}")]
    ArityMismatch {
        factor: String,
        expected: usize,
        found: usize,
    },

    #[error("value `{value}` is outside the {carrier} carrier")]
    ValueOutsideCarrier { value: String, carrier: String },

    #[error("value `{value}` is outside the declared domain of variable `{var}`")]
    OutsideDomain { value: String, var: String },

    #[error("variable {0} is not in the factor's edge")]
    VariableNotInEdge(usize),

    #[error("projection target is not a subset of the factor's edge")]
    NotSubset,

    #[error("aggregate `{0}` is a product aggregate; use product marginalization")]
    ProductAggregate(String),

    #[error("aggregate `{0}` is not a product aggregate")]
    NotProductAggregate(String),

    #[error("variable `{0}` needs an explicit domain")]
    ActiveDomain(String),

    #[error("vertex {0} is not covered by any edge")]
    Uncoverable(usize),

    #[error("invalid variable ordering: {0}")]
    InvalidOrdering(String),

    #[error("join order does not cover variable {0}")]
    JoinOrder(usize),

    #[error("{position}: {message}")]
    Parse { position: Position, message: String },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("query has bound variables but no semiring aggregate")]
    NoSemiringAggregate,

    #[error("brute-force evaluation refused: {0} assignments exceed the guard")]
    DomainExplosion(u128),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl FaqError {
    /// Internal errors signal a construction bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, FaqError::Internal(_))
    }
}
