//! Crate-wide error type.
//!
//! Errors are grouped by the way callers are expected to react to them:
//! configuration problems (reject the input), data problems (reject the
//! dataset), resource limits (refuse to allocate), and internal numerical
//! failures (bugs or ill-conditioned inputs).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run configuration (bad key, bad value, inconsistent sections).
    #[error("config error: {0}")]
    Config(String),

    /// Invalid experimental dataset (parse failure, ordering, arity).
    #[error("data error: {0}")]
    Data(String),

    /// A computation was refused because it would exceed a memory or
    /// dimension limit (e.g. statevector too large without the explicit
    /// opt-in, dense diagonalisation beyond its ceiling).
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Malformed argument to a library call.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// LAPACK / BLAS failure (non-zero info).
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// A numerical post-condition was violated (e.g. imaginary residue of a
    /// quantity that must be real exceeded its tolerance).
    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for command-line use: configuration errors exit
    /// 2, data errors 3, resource-limit refusals 4, anything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) => 3,
            Error::ResourceLimit(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
