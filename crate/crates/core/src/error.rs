use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A time was queried outside the span covered by a tabulated background.
    #[error("time {t} outside background range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The Riemann data falls in the wrong case for the requested solution.
    #[error("case error: {0}")]
    Case(String),

    /// u_l == u_r: no delta peak exists.
    #[error("degenerate Riemann data: u_l == u_r = {0}")]
    Degenerate(f64),

    #[error(
        "CFL violation: max |displacement| = {max_shift} cells at cell {cell} (limit {limit})"
    )]
    Cfl {
        max_shift: f64,
        cell: usize,
        limit: f64,
    },

    #[error("diffusion stability violated: eps*dt/h^2 = {ratio} > 0.5")]
    Diffusion { ratio: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("Poisson solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range { .. } => "range",
            Error::Domain(_) => "domain",
            Error::Case(_) => "case",
            Error::Degenerate(_) => "degenerate",
            Error::Cfl { .. } => "cfl",
            Error::Diffusion { .. } => "diffusion",
            Error::Parameter(_) => "parameter",
            Error::Solver { .. } => "solver",
            Error::Config { .. } => "config",
            Error::Unsupported(_) => "unsupported",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
        }
    }
}
