use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("eigensolver did not converge: {message} (residuals {residuals:?})")]
    Eigensolver {
        message: String,
        residuals: Vec<f64>,
    },

    #[error("no critical intensity in range [{lo}, {hi}]")]
    NoCriticalIntensity { lo: f64, hi: f64 },

    #[error("degenerate kernel: integral of psi0 * K is {0}")]
    DegenerateKernel(f64),

    #[error("no finite critical speed: lambda0 = {0} >= 1")]
    NoFiniteSpeed(f64),

    #[error("no traveling front below the critical speed: c = {c} < c* = {c_star}")]
    BelowCriticalSpeed { c: f64, c_star: f64 },

    #[error("Newton iteration stagnated after {iterations} iterations, residual {residual:e}")]
    Newton { iterations: usize, residual: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical failure at t = {t}: {message}")]
    Numeric { t: f64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Validation(_) | Error::Config(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
