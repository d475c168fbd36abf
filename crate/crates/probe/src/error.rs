use std::io;
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use feature_probe_core::Error as CoreError;

pub type Result<T, E = ProbeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("{path}: not an FTEN file (bad magic at offset {offset})")]
    BadMagic { path: PathBuf, offset: u64 },
    #[error("{path}: unsupported FTEN version {version} at offset {offset}")]
    UnsupportedVersion { path: PathBuf, version: u32, offset: u64 },
    #[error("{path}: unsupported dtype code {code} at offset {offset}")]
    UnsupportedDtype { path: PathBuf, code: u32, offset: u64 },
    #[error("{path}: truncated at offset {offset}, expected {expected} bytes")]
    TruncatedPayload { path: PathBuf, offset: u64, expected: u64 },
    #[error("{path}: non-finite value at offset {offset}")]
    NonFiniteValue { path: PathBuf, offset: u64 },
    #[error("{path}: {message} (offset {offset})")]
    BadHeader { path: PathBuf, offset: u64, message: String },
    #[error("{path}: {message}")]
    BadFile { path: PathBuf, message: String },
    #[error("file not found: {path}")]
    FileNotFound { path: PathBuf },
    #[error("{path}: {source}")]
    IoFailure { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    BadManifest { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Metric(#[from] CoreError),
}

impl ProbeError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            ProbeError::FileNotFound { path: path.to_path_buf() }
        } else {
            ProbeError::IoFailure { path: path.to_path_buf(), source }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProbeError::BadMagic { .. } => "BadMagic",
            ProbeError::UnsupportedVersion { .. } => "UnsupportedVersion",
            ProbeError::UnsupportedDtype { .. } => "UnsupportedDtype",
            ProbeError::TruncatedPayload { .. } => "TruncatedPayload",
            ProbeError::NonFiniteValue { .. } => "NonFiniteValue",
            ProbeError::BadHeader { .. } => "BadHeader",
            ProbeError::BadFile { .. } => "BadFile",
            ProbeError::FileNotFound { .. } => "FileNotFound",
            ProbeError::IoFailure { .. } => "IoFailure",
            ProbeError::BadManifest { .. } => "BadManifest",
            ProbeError::Usage(_) => "UsageError",
            ProbeError::Metric(e) => e.kind(),
        }
    }

    pub fn stride(&self) -> Option<u32> {
        match self {
            ProbeError::Metric(e) => e.stride(),
            _ => None,
        }
    }

    /// 1 for usage errors, 2 for data and metric errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProbeError::Usage(_) => 1,
            _ => 2,
        }
    }

    /// The structured form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": self.kind(), "message": self.to_string(), "stride": self.stride() })
    }
}
