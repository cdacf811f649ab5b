use thiserror::Error;

use crate::model::JobId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is out of range or missing for the selected algorithm.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The event stream or instance does not satisfy the algorithm's input contract.
    #[error("input contract violated: {0}")]
    InputContract(String),

    /// Internal bookkeeping went out of sync (e.g. a sketch move from an empty bucket).
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// An arc pushed a depth past the number of jobs seen, or closed a loop.
    #[error("cycle suspected at arc {src} -> {dst}")]
    CycleSuspected { src: JobId, dst: JobId },

    /// Schedule reconstruction ran out of machines for a depth interval.
    #[error("schedule sketch infeasible: job {job} at depth {depth} does not fit on {machines} machine(s)")]
    SketchInfeasible { job: JobId, depth: u32, machines: u64 },

    /// The exact oracle refuses instances above its size guard.
    #[error("instance too large for exact search (n = {n}, m = {m}; limit n <= {max_n}, m <= {max_m})")]
    OracleGuard { n: usize, m: u64, max_n: usize, max_m: u64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::InputContract(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
