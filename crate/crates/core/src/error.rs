use std::path::PathBuf;

use thiserror::Error;

/// Failures raised by the numerical pipeline and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {0}")]
    Value(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("fixed-point map is not contractive: sampled constant {constant:.6} >= {limit:.6}")]
    Contraction { constant: f64, limit: f64 },

    #[error("fixed-point map does not send the plateau into [{lo}, {hi}]: image reaches {value}")]
    NoSelfMap { lo: f64, hi: f64, value: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    MaxIter { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("Krein pole: |1 + kappa F0| = {0:e}")]
    Pole(f64),

    #[error("vanishing Feshbach denominator at lambda = {lambda}: |D| = {magnitude:e}")]
    Denominator { lambda: f64, magnitude: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("ODE step size underflow at x = {x} (h = {step:e})")]
    StepFailure { x: f64, step: f64 },

    #[error("model assembly failed: {0}")]
    Assembly(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_) => 2,
            Error::Convergence(_)
            | Error::Contraction { .. }
            | Error::NoSelfMap { .. }
            | Error::MaxIter { .. }
            | Error::Pole(_)
            | Error::Denominator { .. }
            | Error::StepFailure { .. }
            | Error::Assembly(_)
            | Error::Degenerate(_) => 3,
            Error::Config(_) | Error::Value(_) | Error::InsufficientData(_) => 4,
            Error::Domain(_) => 3,
            Error::Io { .. } => 1,
            Error::Context { source, .. } => source.exit_code(),
        }
    }

    /// Prefixes the error with where it happened; the exit code is kept.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
