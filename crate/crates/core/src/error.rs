use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid rotating frame: {0}")]
    InvalidFrame(String),

    #[error("invalid mode index {0} (expected 1 or 2)")]
    InvalidMode(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative rate for {name}: {value}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("steady state is not unique: residuals {first:.3e} and {second:.3e}, solution spread {spread:.3e}")]
    DegenerateSteadyState { first: f64, second: f64, spread: f64 },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("integrator failed at t = {t:.6e}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("vanishing denominator {name}: {detail}")]
    ZeroDenominator { name: &'static str, detail: String },

    #[error("moment system is unstable: eigenvalue with real part {real:.6e} rad/s")]
    Unstable { real: f64 },

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("no level crossing in the scanned range: {0}")]
    NoCrossing(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
