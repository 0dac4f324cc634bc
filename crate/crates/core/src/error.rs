use alloc::string::String;

/// Errors raised by the model, optimizer, quadrature and simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interference integral diverges: {0}")]
    DivergentIntegral(String),

    #[error(
        "numerical integration did not converge on [{lower}, {upper}]: \
         estimate {estimate:e}, error {error:e} after {segments} segments"
    )]
    Integration {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        segments: usize,
    },

    #[error("bisection failed to bracket the Lagrange multiplier: {0}")]
    Bracket(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
