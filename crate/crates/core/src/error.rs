use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is malformed or violates an instance invariant.
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("service provider index {index} out of range (have {count})")]
    SpIndex { index: usize, count: usize },

    #[error("session vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },

    #[error("demand of `{sp}` contains a zero component at resource {resource}")]
    ZeroDemand { sp: String, resource: usize },

    #[error("offered load must be finite and non-negative, got {0}")]
    InvalidLoad(f64),

    #[error("allocation infeasible: resource {resource} needs {needed} base units, capacity is {capacity}")]
    Infeasible {
        resource: usize,
        needed: u128,
        capacity: u64,
    },

    #[error("service provider {sp} has n = {n} sessions, above its full-pool maximum {max}")]
    OutOfBounds { sp: usize, n: u64, max: u64 },

    #[error("service provider {sp} is saturated at {max} sessions")]
    Saturated { sp: usize, max: u64 },

    #[error("capacity lattice has {cells} cells, above the limit of {limit}")]
    CapacityExceeded { cells: u128, limit: u128 },

    #[error("exact search exhausted its budget of {budget} nodes without proving optimality")]
    BudgetExhausted { budget: u64 },

    #[error("cannot resolve parameter path `{path}` at segment `{segment}`")]
    UnresolvablePath { path: String, segment: String },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::ZeroDemand { .. }
            | Error::InvalidLoad(_)
            | Error::UnresolvablePath { .. }
            | Error::InvalidSweep(_)
            | Error::InvalidArgument(_)
            | Error::Json(_) => 2,
            Error::Infeasible { .. }
            | Error::OutOfBounds { .. }
            | Error::Saturated { .. }
            | Error::SpIndex { .. }
            | Error::Length { .. }
            | Error::CapacityExceeded { .. }
            | Error::BudgetExhausted { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}
