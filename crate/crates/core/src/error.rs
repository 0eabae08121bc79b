use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid user profile: {0}")]
    InvalidProfile(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("design matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularDesign { condition: f64 },
    #[error("insufficient samples: {samples} rows for {dims} parameters")]
    InsufficientSamples { samples: usize, dims: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("empty input")]
    EmptyInput,
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sample size {n} too small for dimension {d} (need n > d + 1)")]
    DegenerateSampleSize { n: usize, d: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unknown arm {0}")]
    UnknownArm(usize),
    #[error("arm {0} is already registered")]
    DuplicateArm(usize),
    #[error("no arms available")]
    NoArms,
    #[error("no switching cost defined between clusters {0} and {1}")]
    MissingCost(usize, usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("{players} players exceeds the enumeration limit of {limit}")]
    TooManyPlayers { players: usize, limit: usize },
    #[error("no stable partition found")]
    NoStablePartition,
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("arrival rate must be positive, got {0}")]
    InvalidRate(f64),
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}
