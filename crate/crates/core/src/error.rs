use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision limit: {0}")]
    Precision(String),
    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },
    #[error("root at {root} is not the least positive root: sign change near {earlier}")]
    NotLeastRoot { root: f64, earlier: f64 },
    #[error("equation has no solution: {0}")]
    Unsolvable(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cache i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for violated preconditions, as opposed to numerical breakdowns.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Bracket { .. } | Error::Range(_) | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
