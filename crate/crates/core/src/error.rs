use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GdnError>;

#[derive(Debug, Error)]
pub enum GdnError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {node} rejected")]
    SelfLoop { line: usize, node: usize },

    #[error("node index {index} out of range for {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("graph has {n_nodes} nodes, above the dense oracle limit of {limit}")]
    OracleLimit { n_nodes: usize, limit: usize },

    #[error("spectral kernel is not finite at eigenvalue {lambda}")]
    SingularKernel { lambda: f64 },

    #[error("mask selects no entries")]
    EmptyMask,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{rejected} of {trials} trials rejected by the inverse activation domain")]
    TooManyRejections { rejected: usize, trials: usize },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl GdnError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GdnError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(
        context: &'static str,
        expected: impl std::fmt::Debug,
        found: impl std::fmt::Debug,
    ) -> Self {
        GdnError::DimensionMismatch {
            context,
            expected: format!("{expected:?}"),
            found: format!("{found:?}"),
        }
    }

    /// True for failures that originate in the numerics rather than in input handling.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GdnError::SingularKernel { .. }
                | GdnError::NonFinite(_)
                | GdnError::TooManyRejections { .. }
                | GdnError::OracleLimit { .. }
        )
    }
}
