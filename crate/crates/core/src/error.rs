use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Problems found while reading or validating a market description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("malformed market file: {0}")]
    Syntax(String),
    #[error("market has no agents")]
    NoAgents,
    #[error("market has no objects")]
    NoObjects,
    #[error("duplicate agent id {0:?}")]
    DuplicateAgent(String),
    #[error("duplicate object id {0:?}")]
    DuplicateObject(String),
    #[error("agent {agent:?} ranks unknown object {object:?}")]
    UnknownObject { agent: String, object: String },
    #[error("agent {agent:?} ranks object {object:?} more than once")]
    DuplicatePreference { agent: String, object: String },
    #[error("incomplete preference list for agent {agent:?}: missing {missing:?}")]
    IncompletePreferences { agent: String, missing: Vec<String> },
    #[error("object {object:?} has minimum {min} above capacity {cap}")]
    MinExceedsCap { object: String, min: u64, cap: u64 },
    #[error("object {0:?} has zero capacity")]
    ZeroCapacity(String),
    #[error("demand {d} out of range 1..={objects}")]
    DemandOutOfRange { d: u64, objects: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("market is infeasible: no allowable deterministic allocation exists")]
    Infeasible,
    #[error("operation requires unit demand (d = 1), market has d = {0}")]
    RequiresUnitDemand(u64),
    #[error("instance exceeds size cap: {0}")]
    SizeCap(String),
    #[error("allocation is not implementable: {0}")]
    NotImplementable(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inconsistent eating state: {0}")]
    InconsistentState(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
