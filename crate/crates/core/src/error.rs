use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel is identically zero")]
    ZeroKernel,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("kernel is not normalized: weighted squared norm is {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("Mehler ratio |gamma| = {gamma} is not below 1")]
    GammaOutOfRange { gamma: f64 },

    #[error("degenerate measurement series: {0}")]
    DegenerateSeries(String),

    #[error("detection efficiency {0} is outside the allowed range")]
    EfficiencyOutOfRange(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    /// True for errors caused by bad input (files, flags, parameter values)
    /// rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DimensionMismatch(_)
                | Error::Parse { .. }
                | Error::DegenerateSeries(_)
                | Error::EfficiencyOutOfRange(_)
                | Error::Io { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal diagnostics attached to otherwise valid results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// The sampled kernel is still significant on the grid boundary.
    /// `ratio` is max |f|² on the boundary over max |f|² on the grid.
    DomainTruncation { ratio: f64 },
    /// Loss inversion at low efficiency; `condition_number` is the 2-norm
    /// condition number of the loss matrix.
    IllConditioned {
        efficiency: f64,
        condition_number: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DomainTruncation { ratio } => write!(
                f,
                "kernel density at the grid boundary is {ratio:.3e} of its maximum; widen the grid range"
            ),
            Warning::IllConditioned {
                efficiency,
                condition_number,
            } => write!(
                f,
                "loss inversion at efficiency {efficiency} is ill-conditioned (condition number {condition_number:.3e})"
            ),
        }
    }
}
