use thiserror::Error;

/// Errors raised by the model primitives and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A parameter or argument is outside the region where the model is defined.
    #[error("domain error: {param} ({reason})")]
    Domain { param: &'static str, reason: String },

    /// A consumption plan would leave the borrower with negative consumption.
    #[error("negative consumption: {0}")]
    NegativeConsumption(f64),

    /// Bayes' rule is 0/0: zero prior and certain default.
    #[error("posterior is indeterminate (zero prior and certain default)")]
    Indeterminate,

    /// A probability formula evaluated outside [0, 1].
    #[error("{what} = {value} is outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
}

impl ModelError {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Domain {
            param,
            reason: reason.into(),
        }
    }

    /// Name of the offending parameter, when this is a domain error.
    pub fn param(&self) -> Option<&'static str> {
        match self {
            ModelError::Domain { param, .. } => Some(param),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
