use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("arity {arity} exceeds the cap of {cap}")]
    ArityCap { arity: usize, cap: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("negative value {0}")]
    Negative(String),
    #[error("index sets differ")]
    IndexMismatch,
    #[error("table has {found} entries, expected {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("edge {0} is not an internal edge")]
    NotInternal(usize),
    #[error("circuit has external edges")]
    NotClosed,
    #[error("constraint at vertex `{0}` is not strictly terraced")]
    NotStrictlyTerraced(String),
    #[error("not windable: {0}")]
    NotWindable(String),
    #[error("no matchings circuit for constraint at vertex `{0}`")]
    NotExpressible(String),
    #[error("instance has no assignment of positive weight")]
    Unsat,
    #[error("all {0} sampling attempts ended outside the satisfying assignments")]
    SamplerFailed(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
