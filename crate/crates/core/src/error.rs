use std::path::PathBuf;

/// Errors produced anywhere in the ingestion, similarity, factorization and
/// evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop on node `{label}` at line {line}")]
    SelfLoop { label: String, line: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("snapshot {index}: {msg}")]
    CorruptSnapshot { index: usize, msg: String },

    #[error("snapshot {index}: {source}")]
    InSnapshot {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("node {node} is isolated and alpha = 0; the standard random walk is undefined")]
    IsolatedNode { node: usize },

    #[error("transition matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },

    #[error("no evaluable events: {0}")]
    NoEvents(String),

    #[error("negative pool has {pool} pairs but {needed} are required")]
    InsufficientNegatives { needed: usize, pool: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_snapshot(index: usize, source: Error) -> Self {
        Error::InSnapshot {
            index,
            source: Box::new(source),
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerical machinery rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) | Error::NotStochastic { .. } => true,
            Error::InSnapshot { source, .. } | Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Process exit code: 1 for input errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }
}
