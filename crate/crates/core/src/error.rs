use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("degenerate symplectic spectrum (|ν| = {nu:.3e})")]
    DegenerateSpectrum { nu: f64 },

    #[error("unphysical parameters: {0}")]
    Unphysical(String),

    /// The reverse cost is infinite, e.g. a pure nonclassical endpoint.
    #[error("reverse cost diverges: {0}")]
    Divergent(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("eigen solver failed at instant {index} (t = {t})")]
    EigenFailure { index: usize, t: f64 },

    /// A numerical oracle found no feasible point within its search box.
    #[error("no feasible point found: {0}")]
    OracleInfeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
