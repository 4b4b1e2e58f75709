use thiserror::Error;

/// Errors produced by the distribution, tilt, best-of-N and rate-function
/// routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight {value} at index {index} is not a positive finite number")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("alphabet size {0} is below the minimum of 2")]
    AlphabetTooSmall(usize),

    #[error("symbol {symbol} is outside the alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("alphabet sizes differ: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("{what} would need {required} entries, above the cap of {cap}")]
    SizeOverflow {
        what: &'static str,
        required: f64,
        cap: f64,
    },

    #[error("sequence length must be at least 1")]
    EmptySequence,

    #[error("Rényi order must be positive, got {0}")]
    NonPositiveOrder(f64),

    #[error("KL budget {delta} is not below the achievable supremum {max} (margin {margin})")]
    InfeasibleBudget { delta: f64, max: f64, margin: f64 },

    #[error("the reward distribution is uniform: the aligned family is the single point p")]
    DegenerateFamily,

    #[error("target {target} is outside the open range ({lo}, {hi})")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("length mismatch: {left} probabilities vs {right} rewards")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid best-of-N count: {0}")]
    InvalidN(String),

    #[error("sampling budget exceeded: {required} draws requested, budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
