use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("{what}: argument {value} is outside the domain ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: String,
    },

    #[error(
        "unsupported geometry: the closed-form distance laws require height < radius \
         (height = {height}, radius = {radius})"
    )]
    UnsupportedGeometry { height: f64, radius: f64 },

    #[error("{context} did not converge (partial value {partial:e}, error bound {bound:e})")]
    Numerical {
        context: String,
        partial: f64,
        bound: f64,
    },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True when the error stems from user input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Domain { .. }
                | Error::UnsupportedGeometry { .. }
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
