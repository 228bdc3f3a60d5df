use gesturelog_core::annotation::CsvError;
use gesturelog_core::classifier::ClassifierError;
use gesturelog_core::dataset::DatasetError;
use gesturelog_core::metrics::EvalError;
use gesturelog_core::model_file::ModelFileError;
use gesturelog_core::raster::RasterError;

/// Every tooling failure, split by the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("network: {0}")]
    Network(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
}

impl ToolError {
    /// 1 for bad input or a failed check, 2 for I/O and network trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Validation(_) | ToolError::ProtocolViolation(_) => 1,
            ToolError::Io { .. } | ToolError::Network(_) => 2,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        ToolError::Io { context: context.into(), source }
    }

    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        ToolError::Validation(msg.to_string())
    }
}

impl From<DatasetError> for ToolError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(source) => ToolError::io("reading dataset", source),
            other => ToolError::invalid(other),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ToolError {
            fn from(e: $t) -> Self {
                ToolError::invalid(e)
            }
        }
    )*};
}

validation_from!(ClassifierError, EvalError, ModelFileError, RasterError, CsvError);

impl From<reqwest::Error> for ToolError {
    fn from(e: reqwest::Error) -> Self {
        ToolError::Network(e.to_string())
    }
}

impl From<tokio_tungstenite::tungstenite::Error> for ToolError {
    fn from(e: tokio_tungstenite::tungstenite::Error) -> Self {
        ToolError::Network(e.to_string())
    }
}
