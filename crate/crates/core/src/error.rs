use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario mismatch: expected {expected:?}, found {found:?}")]
    ScenarioMismatch {
        expected: [usize; 4],
        found: [usize; 4],
    },
    #[error("incomplete table: expected {expected} entries, found {found}")]
    IncompleteTable { expected: usize, found: usize },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("cell out of range: {0}")]
    CellOutOfRange(String),
    #[error("enumeration too large: {count} items exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },
    #[error("exact arithmetic required: {0}")]
    ExactRequired(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("observable {0} does not square to the identity")]
    NotInvolution(usize),
    #[error("observables {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("SDP solver failed: {0}")]
    Sdp(String),
    #[error("cannot rationalize entry {index} = {value}")]
    Rationalization { index: usize, value: f64 },
    #[error("region split undefined: {0}")]
    RegionSplit(String),
    #[error("too many cells for bitset engine: {0} > 128")]
    TooManyCells(usize),
    #[error("not a valid Bell inequality: local maximum {found} exceeds bound {bound}")]
    BoundViolated { bound: String, found: String },
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
