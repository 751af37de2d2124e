use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants split along the line the CLI cares about: bad input
/// (`Precondition`, `Regime`) is the caller's fault and maps to exit code 2,
/// everything else is a numerical failure and maps to exit code 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parameters outside the supported regime: {0}")]
    Regime(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("series diverges: largest singular value {singular_value} >= 1")]
    Divergence { singular_value: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Prefixes the message with `context`, keeping the variant.
    pub fn context(self, context: &str) -> Self {
        match self {
            Error::Precondition(m) => Error::Precondition(format!("{context}: {m}")),
            Error::Regime(m) => Error::Regime(format!("{context}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{context}: {m}")),
            Error::InvariantViolation(m) => Error::InvariantViolation(format!("{context}: {m}")),
            d @ Error::Divergence { .. } => d,
        }
    }

    /// True for errors caused by the inputs rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Precondition(_) | Error::Regime(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
