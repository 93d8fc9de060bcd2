//! Error type shared by every module of the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by instance construction, game resolution, mechanism
/// evaluation, and the experiment harness.
#[derive(Debug)]
pub enum Error {
    /// An instance was built from an empty position list.
    EmptyInput,
    /// A position (or parameter) was NaN or infinite.
    NonFinite { value: f64 },
    /// A position fell outside the unit domain.
    OutOfRange { value: f64 },
    /// Distribution or configuration parameters were invalid.
    InvalidParams(String),
    /// Two paired sequences had different lengths.
    LengthMismatch { expected: usize, actual: usize },
    /// An exhaustive profile scan would exceed the configured cap.
    TooLarge { profiles: u128, cap: u128 },
    /// The operation is only defined for a different facility count.
    UnsupportedArity { m: usize },
    /// The parameter combination is outside the supported characterization.
    UnsupportedCase(String),
    /// Total facility capacity must be strictly below the agent count.
    CapacityInfeasible { total_capacity: usize, agents: usize },
    /// No object with the requested parameters exists.
    Infeasible(String),
    /// The mechanism admits equilibria with different welfare, so the
    /// requested quantity is not well defined.
    NotEquilibriumStable(String),
    /// An explicit precondition of the operation was violated.
    PreconditionViolated(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for validation errors, 3 when the
    /// request is infeasible or the mechanism is not equilibrium stable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapacityInfeasible { .. }
            | Error::Infeasible(_)
            | Error::NotEquilibriumStable(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInput => write!(f, "empty input: at least one position is required"),
            Error::NonFinite { value } => write!(f, "non-finite value: {value}"),
            Error::OutOfRange { value } => {
                write!(f, "position {value} outside the unit domain")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::TooLarge { profiles, cap } => {
                write!(f, "profile space of size {profiles} exceeds cap {cap}")
            }
            Error::UnsupportedArity { m } => {
                write!(f, "operation not supported for m = {m} facilities")
            }
            Error::UnsupportedCase(msg) => write!(f, "unsupported case: {msg}"),
            Error::CapacityInfeasible {
                total_capacity,
                agents,
            } => write!(
                f,
                "total capacity {total_capacity} must be below the number of agents {agents}"
            ),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::NotEquilibriumStable(msg) => {
                write!(f, "not equilibrium stable: {msg}")
            }
            Error::PreconditionViolated(msg) => write!(f, "precondition violated: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
