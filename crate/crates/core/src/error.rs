use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A support, ramp or evaluation point lies outside the time grid.
    #[error("range error: {0}")]
    Range(String),

    /// Malformed or inconsistent arguments.
    #[error("argument error: {0}")]
    Argument(String),

    /// A documented precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The causal relation was requested for functionals that are not future-ordered.
    #[error("causality error: {0}")]
    Causality(String),

    /// The Weyl normal form only exists for linear words of the free Lagrangean.
    #[error("normal form unavailable: {0}")]
    NormalFormUnavailable(String),

    /// The counting state cannot be decided for this word.
    #[error("undecidable: {0}")]
    Undecidable(String),

    /// The Schroedinger representation cannot be built with these settings.
    #[error("representation configuration error: {message} (measured leakage {leakage:.3e})")]
    RepConfig { message: String, leakage: f64 },

    /// Norm escaping the trustworthy region of the position grid exceeded the limit.
    #[error("leakage {leakage:.3e} exceeds limit {limit:.3e}")]
    Leakage { leakage: f64, limit: f64 },

    /// The adaptive integrator could not meet its tolerance.
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    /// Scenario configuration could not be parsed.
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A configuration referenced an unknown catalog entry or key.
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: String, name: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
