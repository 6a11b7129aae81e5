use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The integrator produced NaN/Inf state; indicates a solver or clamp
    /// bug, not a model outcome.
    #[error("non-finite state at t = {t} (agent {agent})")]
    NonFiniteState { t: f64, agent: usize },

    #[error("unknown avoidance strategy '{0}' (expected none|potential|gyro|cbc|orca)")]
    UnknownStrategy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed sweep spec: {0}")]
    SpecParse(String),

    #[error("malformed results file: {0}")]
    ResultsParse(String),
}
