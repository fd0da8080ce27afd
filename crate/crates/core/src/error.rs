use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range input supplied by the caller.
    #[error("input error: {0}")]
    Input(String),

    /// A protocol tree or partition that does not describe a deterministic protocol.
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    /// A desk-scale guard was exceeded.
    #[error("resource guard: {0}")]
    Resource(String),

    /// A proven invariant failed during a run. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// A correctness or cost claim failed on a concrete run or family.
    #[error("claim violated: {0}")]
    ClaimViolation(String),

    /// A transcript being replayed does not match the protocol's public logic.
    #[error("replay mismatch: {0}")]
    Replay(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("generation failed after {attempts} attempts: {filter}")]
    Generation { attempts: usize, filter: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code for this error: 1 for violations, 2 for bad input,
    /// 3 for resource guards.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse { .. } | Error::InvalidProtocol(_) => 2,
            Error::Resource(_) | Error::Generation { .. } => 3,
            Error::Invariant(_) | Error::ClaimViolation(_) | Error::Replay(_) => 1,
        }
    }
}
