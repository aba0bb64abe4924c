use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigError {
    #[error("attachment probability p[{index}] = {value} is outside (0, 1)")]
    ProfileRange { index: usize, value: f64 },

    #[error("invalid size: {0}")]
    Size(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for {len} nodes")]
    Index { index: usize, len: usize },

    #[error("work budget exceeded: {needed} pair operations > budget {budget}")]
    WorkBudget { needed: u128, budget: u128 },

    #[error("exact enumeration over {m} attributes exceeds the limit of {limit}")]
    EnumerationBudget { m: usize, limit: usize },

    #[error("invalid process state: {0}")]
    State(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RigError>;
