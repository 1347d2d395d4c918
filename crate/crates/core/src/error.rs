use thiserror::Error;

/// Errors raised by operator construction, matrix functions and the verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {requested} exceeds the configured cap {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("domain error: {what} (eigenvalue {eigenvalue:.6e})")]
    Domain { what: String, eigenvalue: f64 },

    #[error("eigensolver did not converge (off-diagonal residual {residual:.3e})")]
    NumericalFailure { residual: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parameter out of range: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: impl Into<String>, eigenvalue: f64) -> Self {
        Error::Domain {
            what: what.into(),
            eigenvalue,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
