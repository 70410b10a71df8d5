use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("numerical integrity failure: {0}")]
    Numerical(String),

    #[error("Fock cutoff {cutoff} too small (leakage {leakage:.3e}); need cutoff >= {needed}")]
    CutoffTooSmall {
        cutoff: usize,
        needed: usize,
        leakage: f64,
    },

    #[error("outcome has zero heralding probability")]
    ImpossibleOutcome,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors that signal a tolerance breach rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian(_) | Error::NotPositive(_) | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
