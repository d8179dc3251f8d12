use thiserror::Error;

use crate::dist::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown label `{label}` for variable `{variable}`")]
    UnknownLabel { variable: String, label: String },
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate label `{label}` in alphabet of `{variable}`")]
    DuplicateLabel { variable: String, label: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("conditioning on `{variable}={label}` which has zero probability")]
    ZeroProbability { variable: String, label: String },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("variable name `{0}` is already in use")]
    NameCollision(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(ValidationReport),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("message function is not total: {0}")]
    NonTotalMessage(String),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input (as opposed to size caps
    /// or internal failures).
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, Error::SizeCap(_) | Error::InternalConsistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
