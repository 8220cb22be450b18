use thiserror::Error;

/// Errors raised anywhere in the search/cluster/retrain stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite value in {0}")]
    Numeric(String),
    #[error("encoding error in field `{field}`: {message}")]
    Encoding { field: String, message: String },
    #[error("lookup error: index {index} out of range for field {field} (size {size})")]
    Lookup {
        field: usize,
        index: usize,
        size: usize,
    },
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("config error for `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("metric undefined: {0}")]
    MetricUndefined(String),
    #[error("clustering error: {0}")]
    Clustering(String),
    #[error("pipeline error: {0}")]
    Pipeline(String),
    #[error("stage precondition violated: {0}")]
    StagePrecondition(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-parsable category used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::Numeric(_) => "numeric",
            Error::Encoding { .. } => "encoding",
            Error::Lookup { .. } => "lookup",
            Error::EmptyDataset(_) => "empty-dataset",
            Error::Config { .. } => "config",
            Error::MetricUndefined(_) => "metric-undefined",
            Error::Clustering(_) => "clustering",
            Error::Pipeline(_) => "pipeline",
            Error::StagePrecondition(_) => "stage-precondition",
            Error::Checkpoint(_) => "checkpoint",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Serde(_) => "serialization",
        }
    }

    pub(crate) fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
