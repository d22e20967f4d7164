use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The tail Σ_{n≥M} λₙ² vanishes, so the normalized tail is undefined.
    #[error("degenerate tail: no positive weights at or beyond index {m}")]
    DegenerateTail { m: usize },

    /// An expansion of order `needed` was requested from too few cumulants.
    #[error("insufficient cumulants: order {needed} requested, only up to {available} available")]
    InsufficientCumulants { needed: usize, available: usize },

    /// A numerical routine stopped before reaching its tolerance.
    #[error("numerical failure in {what}: achieved error estimate {achieved:e}")]
    Numerical { what: &'static str, achieved: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of numerical routines, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
