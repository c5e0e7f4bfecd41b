use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants are grouped so that front ends can map them onto distinct exit
/// statuses (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent function is not finite at t = {t}")]
    Evaluation { t: f64 },

    #[error("kernel is singular: x and y coincide")]
    Singularity,

    #[error("point {point:?} lies outside the sampled domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error(
        "discarded tail {bound:.3e} exceeds tolerance {tolerance:.3e} at radius {radius:.3e}; \
         increase the tail radius or the tail tolerance"
    )]
    Tail { bound: f64, tolerance: f64, radius: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation failed at {} point(s); first at index {}: {}", .failures.len(), .failures[0].0, .failures[0].1)]
    Field { failures: Vec<(usize, Box<Error>)> },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn domain(point: &[f64], reason: impl Into<String>) -> Self {
        Error::Domain {
            point: point.to_vec(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status associated with this error class.
    ///
    /// `0` pass, `2` check failed, `3` precondition, `4` numeric, `5` I/O, `64` usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_) | Error::Domain { .. } => 3,
            Error::Evaluation { .. } | Error::Singularity | Error::Tail { .. } | Error::Numeric(_) => 4,
            Error::Field { failures } => failures[0].1.exit_code(),
            Error::Io { .. } => 5,
            Error::InvalidInput(_) | Error::Parse(_) => 64,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
