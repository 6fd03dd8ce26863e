use thiserror::Error;

/// Errors raised by the topic-model workbench.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument was outside its domain (e.g. a non-positive concentration).
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A generator, sampler or experiment configuration violates one of its constraints.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Input data is unusable (empty corpus, mismatched dimensions, ...).
    #[error("invalid input: {0}")]
    Input(String),
    /// The estimate assigns zero mass to an outcome the reference distribution supports.
    #[error("divergence is infinite: q[{index}] = 0 where p[{index}] > 0")]
    Divergence { index: usize },
    /// Bookkeeping went out of sync; always a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
