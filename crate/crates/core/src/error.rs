use std::io;

use crate::graph::VertexKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("edge {a_kind}:{a_id} -- {b_kind}:{b_id} is not a song-keyword or image-keyword pair")]
    KindViolation {
        a_kind: VertexKind,
        a_id: String,
        b_kind: VertexKind,
        b_id: String,
    },

    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),

    #[error("unresolved reference to {0}")]
    UnresolvedReference(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate key {0}")]
    DuplicateKey(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("keyword {0} has no expansion entry")]
    MissingKeyword(String),

    #[error("song {0} has no lyrics entry")]
    MissingSong(String),

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Self {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any line-number wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            Error::AtLine { line, .. } => Some(*line),
            _ => None,
        }
    }
}
