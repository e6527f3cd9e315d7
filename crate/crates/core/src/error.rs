use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid index-set specification: {0}")]
    InvalidSpec(String),

    #[error("multi-index {0:?} is not a member of the set")]
    NotMember(Vec<u32>),

    #[error("index {index:?} lies outside the box {bounds:?}")]
    OutOfBounds { index: Vec<usize>, bounds: Vec<usize> },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Newton iteration for the {0}-point Gauss-Legendre rule did not converge")]
    NoConvergence(usize),

    #[error("factor matrix with {rows} nodes cannot hold {cols} basis functions at full rank")]
    TooFewNodes { rows: usize, cols: usize },

    #[error("matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("invalid discrete distribution: {0}")]
    InvalidDistribution(String),

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sampler precondition violated: {0}")]
    Precondition(String),

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("problem of {rows} rows exceeds the budget of {budget}")]
    SizeBudget { rows: usize, budget: usize },

    #[error("ODE integration produced a non-finite state at t = {0}")]
    NonFinite(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal fault: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
