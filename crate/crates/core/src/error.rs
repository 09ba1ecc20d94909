use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p-adic value lost precision: {0}")]
    PrecisionLoss(String),
    #[error("enumeration budget exceeded: {candidates} candidates > budget {budget}")]
    ExplosionGuard { candidates: u128, budget: u128 },
    #[error("matrix entry is not an exact rational: {0}")]
    NotRational(String),
    #[error("strong approximation failed: {0}")]
    NoDecomposition(String),
    #[error("exponential series diverges: {0}")]
    ExpDivergent(String),
    #[error("logarithm undefined: {0}")]
    LogUndefined(String),
    #[error("invariant-core iteration did not stabilise after {0} rounds")]
    NonStabilizing(usize),
    #[error("linear map kernel is not exactly A_L: {0}")]
    DegenerateLambda(String),
    #[error("goodness fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error("no invariant-measure sampler for subgroup {0}")]
    UnsupportedL(String),
    #[error("fundamental-domain reduction did not terminate after {0} steps")]
    NonTermination(usize),
    #[error("unknown catalogue id {0:?}")]
    UnknownSubgroup(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
