use std::path::PathBuf;

/// Errors shared across table construction, persistence, and analysis.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {k} out of range for table over 1..={limit}")]
    OutOfRange { k: u64, limit: u64 },

    #[error("resource limit exceeded: need {required} bytes, budget {budget} bytes")]
    ResourceLimit { required: u64, budget: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("not in catalog: {0}")]
    NotInCatalog(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("integrity failure in {path:?}: {detail}")]
    Integrity { path: PathBuf, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }

    /// True for failures that mean "the data on disk is not what it says it
    /// is" rather than "the call was malformed".
    pub fn is_integrity(&self) -> bool {
        matches!(self, CoreError::Integrity { .. })
    }
}
