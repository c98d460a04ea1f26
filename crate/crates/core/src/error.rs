use thiserror::Error;

/// Errors raised by the evaluation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A closed form was evaluated outside its real domain.
    #[error("domain error at n={n}, H={h}, c={c}: {reason}")]
    Domain {
        n: usize,
        h: f64,
        c: f64,
        reason: String,
    },

    /// A parameter is outside the range an operation accepts.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input collapsed to a degenerate object (zero trace-free part, zero vector).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The curvature invariants are mutually inconsistent (for example S < nH²).
    #[error("invalid invariants: {0}")]
    InvalidInvariants(String),

    /// An exact identity was evaluated where one of its sides is undefined.
    #[error("identity domain failure: {0}")]
    IdentityDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
