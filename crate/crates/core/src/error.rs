use thiserror::Error;

use crate::domain::Part;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rate table: {0}")]
    InvalidRateTable(String),

    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),

    #[error("invalid limits: {0}")]
    InvalidLimits(String),

    #[error("invalid failure history: {0}")]
    InvalidHistory(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("simulation did not produce the requested events within {cap} days")]
    NonTerminating { cap: u32 },

    #[error("value iteration exceeded {cap} sweeps (last residual {residual:e})")]
    IterationCap { cap: usize, residual: f64 },

    #[error("history has no events for part {}", .0.number())]
    DegenerateHistory(Part),

    #[error("policy is not threshold-shaped: {0}")]
    StructureViolation(String),

    #[error("objective values sum to zero")]
    ZeroMass,

    #[error("objective series has zero variance")]
    ZeroVariance,

    #[error("historical mean cost is zero")]
    DivisionByZero,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
