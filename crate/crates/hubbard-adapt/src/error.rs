use std::path::PathBuf;

use hubbard_adapt_core::Error as CoreError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for anything wrong with the request, 2 for failures while computing
    /// or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Core(CoreError::NonFinite { .. } | CoreError::Degenerate(_)) => 2,
            RunError::Core(_) => 1,
            RunError::Io { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Core(CoreError::Validation(_)) => "validation",
            RunError::Core(CoreError::Resource { .. }) => "resource",
            RunError::Core(CoreError::Geometry(_)) => "geometry",
            RunError::Core(CoreError::Degenerate(_)) => "degenerate",
            RunError::Core(CoreError::NonFinite { .. }) => "non_finite",
            RunError::Core(CoreError::Config(_)) => "config",
            RunError::Core(CoreError::Parse { .. }) => "parse",
            RunError::Io { .. } => "io",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            exit_code: i32,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper {
            error: Body {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
            },
        })
        .expect("error serializes")
    }
}
