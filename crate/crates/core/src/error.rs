use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid size for {what}: {got}")]
    InvalidSize { what: &'static str, got: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected: vertices {a} and {b} lie in different components")]
    Disconnected { a: usize, b: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible request: only {achieved} part(s) could be produced")]
    Infeasible { achieved: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("requested time {requested} exceeds the materialized horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("state space too large: {n} vertices exceeds the cap of {cap}")]
    Capacity { n: usize, cap: usize },

    #[error("internal defect: {0}")]
    Defect(String),
}

pub type Result<T> = std::result::Result<T, Error>;
