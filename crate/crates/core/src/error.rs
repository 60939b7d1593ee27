use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The analytic path cannot handle this input; use the Monte Carlo path.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Conditioning on an event of (numerically) zero probability.
    #[error("degenerate conditioning at l = {l}: 1 - F_L(l) = {survival:e}")]
    DegenerateCondition { l: f64, survival: f64 },

    #[error("stale or corrupt CDF cache {path}: {detail}")]
    StaleCache { path: PathBuf, detail: String },

    #[error("scenario parse error in field `{field}`: {detail}")]
    Parse { field: String, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn parse(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
