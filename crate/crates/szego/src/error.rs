use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: validation failures (bad input, violated
/// preconditions) and numerical failures (a computation ran but its result
/// could not be certified). [`Error::is_validation`] tells them apart; the CLI
/// maps them to exit codes 2 and 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(
        "grid of {grid} points cannot represent {modes} modes (need a power of two >= {required})"
    )]
    Alias {
        grid: usize,
        modes: usize,
        required: usize,
    },

    #[error("denominator has a root of modulus {0:.6} in the closed unit disc")]
    UnstableDenominator(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit residual {residual:.3e} exceeds tolerance {tol:.3e} (degree {degree})")]
    DegreeMismatch {
        residual: f64,
        tol: f64,
        degree: usize,
    },

    #[error("fitted quotient is not a Blaschke product: {0}")]
    Structure(String),

    #[error("inconsistent spectrum: {0}")]
    InconsistentSpectrum(String),

    #[error("rank not resolved: last-quarter coefficient energy fraction {0:.3e}")]
    Unresolved(f64),

    #[error("matrix is singular at grid point {index} (|det| = {det:.3e})")]
    Singular { index: usize, det: f64 },

    #[error("invariant drift {drift:.3e} in {quantity} at t = {time}")]
    Drift {
        quantity: String,
        drift: f64,
        time: f64,
    },

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::Alias { .. }
                | Error::UnstableDenominator(_)
                | Error::Domain(_)
                | Error::Io(_)
                | Error::Parse(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
