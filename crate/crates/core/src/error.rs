use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("edge ({src}, {dst}) has an endpoint outside [0, {n})")]
    InvalidEdge { src: usize, dst: usize, n: usize },

    #[error("duplicate directed edge ({src}, {dst})")]
    DuplicateEdge { src: usize, dst: usize },

    #[error("node {node} is outside [0, {n})")]
    InvalidNode { node: usize, n: usize },

    #[error("training mask selects no labeled node")]
    EmptyMask,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("k = {k} exceeds the ranked list length {len}")]
    KTooLarge { k: usize, len: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("silhouette needs at least two clusters")]
    SingleCluster,

    #[error("training labels contain a single class")]
    SingleClassInput,

    #[error("splitting {edges} edges at ratio {ratio} leaves an empty test set")]
    TooFewEdges { edges: usize, ratio: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{what}: expected {expected}, found {found}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(
        context: &'static str,
        expected: impl std::fmt::Display,
        found: impl std::fmt::Display,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
