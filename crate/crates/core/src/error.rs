use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("duplicate point at position {0}")]
    DuplicatePoint(usize),
    #[error("neighborhood graph is disconnected (component sizes {0:?})")]
    Disconnected(Vec<usize>),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("simplex {0:?} is not present at scale {1}")]
    ScaleViolation(Vec<u32>, f64),
    #[error("loop sample is not dense enough: {0}")]
    NotDenseEnough(String),
    #[error("bad triple: {0}")]
    BadTriple(String),
    #[error("lid boundary does not match the grid row {0}")]
    LidMismatch(usize),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("representative has only {0} distinct vertices")]
    TooFewVertices(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bad(msg: impl Into<String>) -> Error {
    Error::BadParameter(msg.into())
}
