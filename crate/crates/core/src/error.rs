use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown fixture `{name}` (available: {available})")]
    UnknownFixture { name: String, available: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
