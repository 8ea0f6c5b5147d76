use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("prefix sum overflows u64 at prime index {index}")]
    PrefixOverflow { index: usize },

    #[error("index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("query n={n} k={k} needs {needed} primes but the table holds {count}")]
    Range {
        n: usize,
        k: usize,
        needed: usize,
        count: usize,
    },

    #[error("n = 1 is excluded: every odd-length sum starting at 2 is even, hence composite")]
    ParityObstruction,

    #[error("{0}")]
    Domain(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("checkpoint {}: line {line}: {reason}", path.display())]
    CheckpointCorrupt { path: PathBuf, line: usize, reason: String },

    #[error("checkpoint {}: run parameters differ ({reason})", path.display())]
    CheckpointMismatch { path: PathBuf, reason: String },

    #[error("run interrupted after {completed_chunks} completed chunks")]
    Interrupted { completed_chunks: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
