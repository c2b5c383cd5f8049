use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: unknown label {value}")]
    UnknownLabel { line: usize, value: String },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("split mismatch: {left} vs {right}")]
    SplitMismatch { left: String, right: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("word {0:?} not in embedding table")]
    UnknownWord(String),

    #[error("missing resource for strategy {strategy}: {resource}")]
    MissingResource {
        strategy: &'static str,
        resource: &'static str,
    },

    #[error("training diverged at step {step}: loss {loss}")]
    Diverged { step: usize, loss: f64 },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
