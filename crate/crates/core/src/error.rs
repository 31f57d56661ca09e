use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid block picks: {0}")]
    InvalidPicks(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("exhaustive sweep needs {runs} runs, limit is {limit}")]
    SweepTooLarge { runs: u128, limit: u128 },

    #[error("malformed scheme file: {0}")]
    Malformed(String),
}
