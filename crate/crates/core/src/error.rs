use std::path::PathBuf;

use thiserror::Error;

use crate::findings::{Finding, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("missing required field `{path}`")]
    MissingField { path: String },

    #[error("unknown field `{path}`")]
    UnknownField { path: String },

    #[error("type mismatch at `{path}`: {message}")]
    TypeMismatch { path: String, message: String },

    #[error("unsupported schema_version {found:?} (expected \"1\")")]
    SchemaVersion { found: Option<String> },

    #[error("invariant violated at `{path}`: {message}")]
    Invariant { path: String, message: String },

    #[error("degenerate class balance: {positives} positive and {negatives} negative records")]
    DegenerateClasses { positives: usize, negatives: usize },

    #[error("negative value {value} at `{path}`")]
    NegativeInput { path: String, value: f64 },

    #[error("{what} {value} outside {range}")]
    OutOfRange { what: &'static str, value: String, range: &'static str },

    #[error("empty reading group {key}")]
    EmptyGroup { key: String },

    #[error("reading references unknown participant `{participant_id}`")]
    DanglingParticipant { participant_id: String },

    #[error("dimension `{dimension}` has fewer than two populated strata")]
    InsufficientStrata { dimension: String },

    #[error("missing required section `{section}`")]
    MissingSection { section: String },

    #[error("validation failed with {} error(s)", .0.errors().count())]
    Validation(ValidationReport),

    #[error("{path}: line {line}: {message}")]
    Csv { path: String, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no device acknowledged address {address:#04x}")]
    Nack { address: u8 },

    #[error("register at {address:#04x} is read-only")]
    ReadOnly { address: u8 },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Field path this error refers to, when it refers to one.
    pub fn path(&self) -> Option<&str> {
        match self {
            Error::MissingField { path }
            | Error::UnknownField { path }
            | Error::TypeMismatch { path, .. }
            | Error::Invariant { path, .. }
            | Error::NegativeInput { path, .. }
            | Error::Csv { path, .. } => Some(path),
            Error::MissingSection { section } => Some(section),
            _ => None,
        }
    }

    /// Prefixes the field path (if any) with `prefix.`.
    pub fn within(self, prefix: &str) -> Self {
        let join = |p: String| if p.is_empty() { prefix.to_string() } else { format!("{prefix}.{p}") };
        match self {
            Error::MissingField { path } => Error::MissingField { path: join(path) },
            Error::UnknownField { path } => Error::UnknownField { path: join(path) },
            Error::TypeMismatch { path, message } => Error::TypeMismatch { path: join(path), message },
            Error::Invariant { path, message } => Error::Invariant { path: join(path), message },
            Error::NegativeInput { path, value } => Error::NegativeInput { path: join(path), value },
            other => other,
        }
    }

    /// Converts the error into findings, using `fallback_path` when the error
    /// carries no path of its own.
    pub fn into_findings(self, fallback_path: &str) -> ValidationReport {
        match self {
            Error::Validation(report) => report,
            other => {
                let path = other.path().unwrap_or(fallback_path).to_string();
                std::iter::once(Finding::error(path, other.to_string())).collect()
            }
        }
    }
}
