use thiserror::Error;

/// Errors raised by lattice construction, propagation and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("invalid z grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Chebyshev expansion needs order {required} which exceeds the cap {cap}; spectral bounds are suspect")]
    ChebyshevNonConvergence { required: usize, cap: usize },

    #[error("integration step {dz} too large for spectral radius {radius} (need dz * radius < 1)")]
    StepTooLarge { dz: f64, radius: f64 },

    #[error("window of {n_sites} sites too small: truncated tail {tail:e} exceeds {limit:e}")]
    WindowTooSmall { n_sites: usize, tail: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate fit window: {points} points (need at least 4)")]
    DegenerateWindow { points: usize },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
