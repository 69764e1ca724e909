use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error(
        "Yule-Walker system is ill-conditioned for f_m = {fm}, order {order} \
         (condition number {condition:.3e})"
    )]
    IllConditioned { fm: f64, order: usize, condition: f64 },

    #[error("unstable AR model: {0}")]
    UnstableModel(String),

    #[error("insufficient history: need at least {needed} slots, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("predictor not ready: delay line holds {have} of {need} matrices")]
    NotReady { have: usize, need: usize },

    #[error("twin predictors desynchronized at slot {slot}")]
    Desynchronized { slot: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("channel estimate has zero norm")]
    ZeroNorm,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
