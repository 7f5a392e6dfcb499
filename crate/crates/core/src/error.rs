use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("game with {0} players is too large for this operation (limit {1})")]
    TooManyPlayers(usize, usize),

    #[error("game is not quasi-balanced: {0}")]
    NotQuasiBalanced(String),

    #[error("imputation set is empty: v(N) = {grand} < sum of singleton worths {singletons}")]
    EmptyImputationSet { grand: f64, singletons: f64 },

    #[error("linear program failed: {0}")]
    Lp(#[from] crate::solutions::simplex::LpError),

    #[error("nucleolus did not converge after {0} stages")]
    NucleolusStalled(usize),

    #[error("cannot normalize a payoff vector that sums to {0}")]
    DegeneratePayoff(f64),

    #[error("invalid bid: {0}")]
    InvalidBid(String),
}
