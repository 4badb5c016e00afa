use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("region carries zero mass under the density")]
    DegenerateMass,

    #[error("sites {0} and {1} coincide")]
    DegenerateSites(usize, usize),

    #[error("robot {robot} is missing reports from neighbours {missing:?}")]
    IncompleteInformation { robot: usize, missing: Vec<usize> },

    #[error("communication graph is not connected")]
    Disconnected,

    #[error("consensus did not converge within {iterations} iterations (last spread {:e})", trace.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid value for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            already @ Error::Step { .. } => already,
            other => Error::Step {
                step,
                source: Box::new(other),
            },
        }
    }
}
