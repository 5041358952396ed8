use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("priority vectors differ in length: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("not a permutation of 1..={len}: {positions:?}")]
    InvalidPermutation { positions: Vec<u32>, len: usize },

    #[error("priority order must contain at least one task")]
    EmptyOrder,

    #[error("realized misalignment {gamma} exceeds the initial misalignment {theta}")]
    RealizedExceedsInitial { theta: u64, gamma: u64 },

    #[error("realized misalignment {gamma} exceeds the winner's reported misalignment {reported}")]
    RealizedExceedsReport { gamma: u64, reported: u64 },

    #[error("at least two agents are required (a second-lowest bid must exist), got {0}")]
    InsufficientAgents(usize),

    #[error(
        "winning must strictly lower the next-stage misalignment: \
         tilde[{agent}][{stage}] = {tilde} >= hat[{agent}][{stage}] = {hat}"
    )]
    ConditionalNotLower { agent: usize, stage: usize, tilde: u64, hat: u64 },

    #[error("type table is malformed: {0}")]
    MalformedTypeTable(String),

    #[error("payment rule vcg_residual requires a precomputed optimal-welfare parameter")]
    MissingWelfareBaseline,

    #[error("the multi-stage lookahead mechanism requires linear effort cost")]
    NonlinearCostUnsupported,

    #[error("enumeration budget exceeded: needed more than {budget} evaluations")]
    BudgetExceeded { budget: u64 },

    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(String),

    #[error("profit function must be non-increasing in the realized misalignment: {0}")]
    ProfitNotMonotone(String),

    #[error("cannot parse rational value {0:?}: expected \"p\", \"p/q\", or an integer")]
    MalformedRational(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("unsupported sweep parameter {0:?}")]
    UnknownSweepParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
