use std::path::PathBuf;

use thiserror::Error;

use crate::java::Span;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: parse error: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("edits overlap: {first:?} and {second:?}")]
    OverlappingEdits { first: Span, second: Span },

    #[error("edit span {span:?} lies outside content of length {len}")]
    EditOutOfBounds { span: Span, len: usize },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("operator {operator} cannot replace token `{token}`")]
    Unmappable { operator: String, token: String },

    #[error("unknown mutation operator `{0}`")]
    UnknownOperator(String),

    #[error("a higher-order mutant needs exactly 2 constituents, got {0}")]
    Arity(usize),

    #[error("cannot sample from an empty mutant set")]
    EmptyInput,

    #[error("no class size recorded for {}", .0.display())]
    MissingWeight(PathBuf),

    #[error("invalid sampling rate {0}; expected 0 < rate <= 1")]
    InvalidRate(f64),

    #[error("test suite is not green (exit status {exit_status})")]
    NotGreen {
        exit_status: String,
        output: Vec<u8>,
    },

    #[error("failed to restore {}: {source}", path.display())]
    RestoreFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("workspace changed during the run: {}", .0.display())]
    WorkspaceChanged(PathBuf),

    #[error("execution interrupted")]
    Interrupted,

    #[error("{} matches several sources: {}", candidate.display(), display_paths(matches))]
    AmbiguousMatch {
        candidate: PathBuf,
        matches: Vec<PathBuf>,
    },

    #[error("no source file matches {}", .0.display())]
    NoMatch(PathBuf),

    #[error("{} is identical to its source", .0.display())]
    IdenticalToSource(PathBuf),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid pattern: {0}")]
    Pattern(#[from] regex::Error),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn display_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Attaches a path to `std::io::Error`s.
pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}
