use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid feature model: {0}")]
    InvalidModel(String),

    #[error("literal {literal} is out of range for a model with {features} features")]
    LiteralOutOfRange { literal: i32, features: usize },

    #[error("expected {expected} features, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("assumptions contain both polarities of feature {0}")]
    ContradictoryAssumptions(usize),

    #[error("feature model is inconsistent: no valid product exists")]
    InconsistentModel,

    #[error("invalid t-set: {0}")]
    InvalidTSet(String),

    #[error("strength t={t} out of range for {features} features (need 2 <= t <= n)")]
    StrengthOutOfRange { t: usize, features: usize },

    #[error(
        "exact enumeration needs {required} validity checks, over the budget of {budget}; \
         use the sampled estimator instead"
    )]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("product at index {index} violates the feature model")]
    InvalidProduct { index: usize },

    #[error("suite does not match the feature model: {0}")]
    SuiteMismatch(String),

    #[error("suite is empty")]
    EmptySuite,

    #[error(
        "rejection sampling stalled: {valid} valid t-sets after {draws} draws; \
         use exact mode instead"
    )]
    SamplingStall { draws: u64, valid: u64 },

    #[error("coverage value {value} at position {index} is outside [0, 1]")]
    CoverageOutOfRange { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("random model generation failed: {0}")]
    GenerationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
