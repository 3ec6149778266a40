use std::fmt;

use gdn_core::GdnError;

/// Failure classes and their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags or configuration.
    Usage,
    /// Missing files, unreadable or malformed inputs.
    Io,
    /// Non-finite values, singular kernels, failed numerical checks.
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Io => 3,
            ErrorKind::Numerical => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Io => "io",
            ErrorKind::Numerical => "numerical",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind.name(),
                "code": self.kind.exit_code(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

impl From<GdnError> for CliError {
    fn from(e: GdnError) -> Self {
        let kind = match &e {
            GdnError::Io { .. }
            | GdnError::Parse { .. }
            | GdnError::SelfLoop { .. }
            | GdnError::IndexOutOfRange { .. }
            | GdnError::EmptyGraph
            | GdnError::DimensionMismatch { .. }
            | GdnError::Json(_) => ErrorKind::Io,
            GdnError::SingularKernel { .. } | GdnError::NonFinite(_) | GdnError::TooManyRejections { .. } => {
                ErrorKind::Numerical
            }
            GdnError::OracleLimit { .. }
            | GdnError::EmptyMask
            | GdnError::InvalidArgument(_) => ErrorKind::Usage,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
