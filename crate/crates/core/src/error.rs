//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation. `field` is the dotted path
    /// into the chain config (e.g. `afe.fc_hp_hz`).
    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Malformed serial-log content. Line numbers are 1-based.
    #[error("parse error at line {line}: {reason} (line was {text:?})")]
    Parse {
        line: usize,
        reason: String,
        text: String,
    },

    #[error("stream error: {0}")]
    Stream(String),

    #[error("sample rate {sample_rate_hz} Hz cannot carry a {fc_lp_hz} Hz low-pass cutoff (need sample rate > 2x cutoff)")]
    Aliasing { sample_rate_hz: f64, fc_lp_hz: f64 },

    #[error("source rate {source_hz} Hz is below the acquisition rate {acquisition_hz} Hz")]
    Resample { source_hz: f64, acquisition_hz: f64 },

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid_config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn parse(line: usize, reason: impl Into<String>, text: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
            text: text.into(),
        }
    }

    /// Attach the offending path to an I/O error.
    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit code: 1 usage/config, 2 data/parse, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. }
            | Error::InvalidScenario(_)
            | Error::Aliasing { .. }
            | Error::Resample { .. } => 1,
            Error::Parse { .. }
            | Error::Stream(_)
            | Error::File { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Internal(_) => 3,
        }
    }
}
