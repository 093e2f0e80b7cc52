use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("integrand is not finite at x = {x:e}")]
    NonFiniteIntegrand { x: f64 },

    #[error("objective is not finite at x = {x:e}")]
    NonFiniteObjective { x: f64 },

    #[error("experimental design is degenerate at the condition threshold (cdf = {cdf:e})")]
    DegenerateDesign { cdf: f64 },

    #[error("observation has zero evidence ({evidence:e})")]
    ZeroEvidence { evidence: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
