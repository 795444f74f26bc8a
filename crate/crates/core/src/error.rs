//! Crate-wide error type.

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value is outside its mathematical domain (degree, exponent, size).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An index does not address an existing entity (basis index, vertex, facet).
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Malformed mesh file input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The mesh violates a structural invariant (conformity, degeneracy).
    #[error("mesh validation failed: {0}")]
    MeshValidation(String),

    /// An iterative or direct linear solve did not produce a solution.
    #[error("solver failed: {0}")]
    Solver(String),

    /// A condition that the theory guarantees was violated numerically.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
