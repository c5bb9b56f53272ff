use thiserror::Error;

/// Failures surfaced by the library.
///
/// `Input` covers violated preconditions. `Consistency` is raised when an
/// exact identity that must hold (mass formula, integrality, Betti number)
/// does not, or when an internal construction cannot complete.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(format!($($arg)*)) };
}

macro_rules! consistency_err {
    ($($arg:tt)*) => { $crate::error::Error::Consistency(format!($($arg)*)) };
}

pub(crate) use consistency_err;
pub(crate) use input_err;
