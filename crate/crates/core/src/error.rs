use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate system: sum of |det A| is {det_sum:e}")]
    DegenerateSystem { det_sum: f64 },

    #[error("iterate {iteration} diverged: |coordinate| = {magnitude:e} exceeds bound {bound:e}")]
    Diverged {
        iteration: u64,
        magnitude: f64,
        bound: f64,
    },

    #[error("no non-degenerate system after {attempts} consecutive draws")]
    ExhaustedRetries { attempts: u32 },

    #[error("search accepted {accepted} of {required} categories within {attempts} attempts")]
    SearchTimeout {
        accepted: usize,
        required: usize,
        attempts: u64,
    },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("invalid count {0}")]
    InvalidCount(usize),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid value {value:?} for exploration axis {axis}")]
    InvalidAxisValue { axis: String, value: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("integrity check failed for {path}: {reason}")]
    Integrity { path: PathBuf, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl Error {
    /// Stable snake_case identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateSystem { .. } => "degenerate_system",
            Error::Diverged { .. } => "diverged",
            Error::ExhaustedRetries { .. } => "exhausted_retries",
            Error::SearchTimeout { .. } => "search_timeout",
            Error::EmptyCloud => "empty_cloud",
            Error::InvalidCount(_) => "invalid_count",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidAxisValue { .. } => "invalid_axis_value",
            Error::Io { .. } => "io_error",
            Error::Integrity { .. } => "integrity_error",
            Error::Parse { .. } => "parse_error",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn integrity(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Integrity {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
