use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A requested dimension exceeds the configured cap.
    #[error("size error: {0}")]
    Size(String),

    /// An input violates an operation's contract (non-Hermitian, non-unitary, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numeric argument is outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("failed to converge: {0}")]
    Convergence(String),

    /// Malformed model input, e.g. a broken Hermiticity pairing.
    #[error("validation error: {0}")]
    Validation(String),

    /// The request belongs to a different algorithm variant.
    #[error("routing error: {0}")]
    Routing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
