use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its admissible range. `constraint` reads like `gamma >= 0`.
    #[error("invalid parameter `{field}`: requires {constraint} (got {value})")]
    InvalidParameter {
        field: &'static str,
        constraint: &'static str,
        value: String,
    },

    #[error("bandwidth error: {0}")]
    Bandwidth(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("solution diverged at t = {time}: {reason}")]
    Divergence { time: f64, reason: String },

    #[error("iteration failed to converge after {iterations} iterations (last residual {last_residual:e})")]
    Convergence {
        iterations: usize,
        last_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("operator c + l(k) is not positive at mode k = {mode} (value {value})")]
    Spectrum { mode: i64, value: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("snapshot format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, constraint: &'static str, value: impl ToString) -> Self {
        Error::InvalidParameter {
            field,
            constraint,
            value: value.to_string(),
        }
    }
}
