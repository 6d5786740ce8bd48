//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two operands disagree on dimension, or a buffer has the wrong length.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input contained NaN or infinity.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A numeric argument is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear solve hit a (numerically) singular system.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative routine ran out of its iteration budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Exhaustive search was requested for an array too large to enumerate.
    #[error("exhaustive search over {candidates} candidates (n = {n}) exceeds the supported size")]
    OracleTooLarge { n: usize, candidates: u128 },

    /// Scenario sampling could not place a jammer far enough from the satellite.
    #[error("could not draw a jammer direction at least {min_separation_deg} deg from the satellite after {attempts} attempts")]
    SeparationUnsatisfiable {
        min_separation_deg: f64,
        attempts: usize,
    },

    /// A feature vector does not match the model's expected layout.
    #[error("feature vector has length {got}, model expects {expected}")]
    FeatureLength { got: usize, expected: usize },

    /// A model file declares an unsupported format version.
    #[error("model format version {got} is not supported (expected {expected})")]
    ModelVersion { got: u32, expected: u32 },

    /// A model file parsed but fails internal consistency checks.
    #[error("invalid model: {0}")]
    ModelInvalid(String),

    /// A Monte-Carlo trial failed; carries the trial index and scenario echo.
    #[error("trial {index} failed (scenario: {scenario}): {source}")]
    Trial {
        index: usize,
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
