use thiserror::Error;

/// Errors produced by the solver and the verification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e}){}", time_index.map(|n| format!(" at time index {n}")).unwrap_or_default())]
    NonConvergence {
        iterations: usize,
        residual: f64,
        time_index: Option<usize>,
    },

    #[error("operation requires dimension {expected}, grid has {found}")]
    Dimension { expected: usize, found: usize },

    #[error("cylinder (rho = {rho}, theta = {theta}) does not fit inside the grid")]
    CylinderOutOfGrid { rho: f64, theta: f64 },

    #[error("exponent admissibility violated: {0}")]
    Admissibility(String),

    #[error("p = {p} outside the admissible range: {reason}")]
    Range { p: f64, reason: String },

    #[error("cutoff transition band {band:e} spans fewer than two cells (spacing {spacing:e})")]
    GridTooCoarse { band: f64, spacing: f64 },

    #[error("field does not vanish on the lateral boundary (max |u| = {0:e})")]
    Boundary(f64),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
