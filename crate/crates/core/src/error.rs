use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid domain {0:?}")]
    InvalidDomain(String),

    #[error("duplicate domain {0:?}")]
    DuplicateDomain(String),

    #[error("edge endpoint {domain:?} is not a declared node")]
    DanglingEdge { domain: String },

    #[error("node {domain:?} has {found} attributes, manifest declares {expected}")]
    ManifestMismatch {
        domain: String,
        expected: usize,
        found: usize,
    },

    #[error("scheme {scheme} needs provider totals that are missing for: {}", domains.join(", "))]
    MissingProviderTotal {
        scheme: &'static str,
        domains: Vec<String>,
    },

    #[error("zero denominator while weighting edge {source_domain} -> {target_domain} under {scheme}")]
    ZeroDenominator {
        scheme: &'static str,
        source_domain: String,
        target_domain: String,
    },

    #[error("unmappable reliability grade {grade:?} in record for {domain:?}")]
    InvalidGrade { domain: String, grade: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("operation not supported for model family {0}")]
    UnsupportedFamily(&'static str),

    #[error("feature manifest mismatch: model expects [{}], got [{}]", expected.join(","), found.join(","))]
    FeatureMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("cannot resolve checkpoint {}", .0.display())]
    MissingCheckpoint(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error comes from bad input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Divergence { .. })
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
