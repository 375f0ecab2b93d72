use thiserror::Error;

/// Errors raised across the lab.
#[derive(Debug, Error)]
pub enum SnsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("field is not divergence-free (residual {0:e})")]
    NotDivergenceFree(f64),
    #[error("snapshot format error: {0}")]
    Format(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("EXPLOSION_SUSPECTED at t={t}: |w|={norm:e}")]
    Explosion { t: f64, norm: f64 },
    #[error("NUMERIC_NAN at t={t}")]
    NumericNan { t: f64 },
    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SnsError>;
