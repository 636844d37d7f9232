use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoxkitError {
    #[error("coordinate {coord} has value {value}, but its alphabet has size {size}")]
    CoordinateOutOfRange {
        coord: usize,
        value: usize,
        size: usize,
    },
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet weight {index} is negative: {weight}")]
    NegativeWeight { index: usize, weight: String },
    #[error("alphabet weights must sum to exactly 1, got {sum}")]
    WeightsDoNotSumToOne { sum: String },
    #[error("outcome count {count} exceeds the exact-engine cap of {cap}")]
    SpaceTooLarge { count: u128, cap: u64 },
    #[error("events are bound to different product spaces")]
    SpaceMismatch,
    #[error("threshold {value} lies outside [0, 1]")]
    ThresholdOutOfRange { value: String },
    #[error("operation is restricted to proper subsets of the space")]
    NotProperSubset,
    #[error("function is flagged nonnegative but value at outcome {index} is {value}")]
    NegativeFunctionValue { index: usize, value: String },
    #[error("product-bound evaluation requires functions flagged nonnegative")]
    FunctionsMustBeNonnegative,
    #[error("oracle budget exceeded: {work} elementary steps over limit {limit}")]
    OracleBudgetExceeded { work: u128, limit: u64 },
    #[error("annihilation term {term} must be strictly below 1")]
    AnnihilationTermTooLarge { term: f64 },
    #[error("unknown scenario generator `{name}`")]
    UnknownGenerator { name: String },
}

pub type Result<T> = std::result::Result<T, BoxkitError>;
