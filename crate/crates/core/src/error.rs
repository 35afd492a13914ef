use thiserror::Error;

/// Errors raised by the geometric, transport and search routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point needs at least 2 coordinates, got {0}")]
    TooFewCoordinates(usize),

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("row {0} has no real entry")]
    DegenerateRow(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("matrix contains -inf entries; its image is not the hull of its columns")]
    InfiniteEntries,

    #[error("matrix is not surjective: row {0} has no column that is real only there")]
    NotSurjective(usize),

    #[error("witness check failed: {0}")]
    WitnessFailed(String),

    #[error("tie within tolerance at row {row}: point is degenerate in float mode")]
    DegeneratePoint { row: usize },

    #[error("cell is empty")]
    EmptyCell,

    #[error("not a simple projection: {0}")]
    NotSimpleProjection(String),

    #[error("point is not in the fibre over the origin")]
    NotInZeroFibre,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("exponent p must be a finite number >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("exponent {0} is not an integer; exact transport needs integer p")]
    NonIntegerExponent(f64),

    #[error("lower-dimensional measure must have smaller ambient dimension: got {m} and {n}")]
    DimensionOrder { m: usize, n: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("newick syntax error at position {position}: {message}")]
    Newick { position: usize, message: String },

    #[error("tree error: {0}")]
    Tree(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
