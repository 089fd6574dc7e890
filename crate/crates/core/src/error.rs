use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} = {value} lies outside the open unit interval")]
    Domain { what: &'static str, value: f64 },

    #[error("parts {first} and {second} share the atom location {location}")]
    OverlappingParts {
        first: usize,
        second: usize,
        location: f64,
    },

    #[error("parts disagree on construction: {0}")]
    MixedConstructions(String),

    #[error(
        "quadrature did not reach tolerance {tolerance:e} on [{lower}, {upper}]: \
         estimate {estimate}, error {error:e} after {intervals} intervals"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("atom at {location} is listed as observed but has no positive count")]
    UnobservedAtom { location: f64 },

    #[error("empty sample passed to {0}")]
    EmptySample(&'static str),

    #[error("malformed input at {record}: {reason}")]
    Malformed { record: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, value, "must be finite and > 0"))
    }
}
