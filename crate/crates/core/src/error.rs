use thiserror::Error;

/// Coarse failure classes, mapped onto CLI exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Solver,
    Validation,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Solver => 3,
            ErrorCategory::Validation => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Solver => "solver",
            ErrorCategory::Validation => "validation",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("cost model has no entry for gate kind `{0}`")]
    UnknownGateKind(String),

    #[error("wire set is empty")]
    EmptyWireSet,

    #[error("normalization factor {gamma} is below the operator norm {norm}")]
    GammaTooSmall { gamma: f64, norm: f64 },

    #[error("ambient dimension 2^{0} is too large for dense evaluation")]
    TooLarge(usize),

    #[error("projections are not equivalent: {0}")]
    NonEquivalentProjections(String),

    #[error("vector is zero")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimated information efficiency is zero; the iterate vanished (restart from x0 = 0)")]
    ZeroEstimate,

    #[error("matrix is singular")]
    Singular,

    #[error("phase angles: {0}")]
    PhaseAngles(String),

    #[error("phase angles rejected: deviation {deviation:.6} exceeds tolerance {epsilon}")]
    AngleValidation { deviation: f64, epsilon: f64 },

    #[error("circuit width {wires} exceeds the gate-level limit of {limit} wires; use the algebraic backend")]
    WidthLimit { wires: usize, limit: usize },

    #[error("planned {planned} steps but the budget is {budget}")]
    StepBudget { planned: usize, budget: usize },

    #[error("encoding carries no classical shadow; the algebraic backend cannot evaluate it")]
    NoShadow,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("qasm: {0}")]
    Qasm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::ZeroEstimate
            | Error::Singular
            | Error::StepBudget { .. }
            | Error::NonEquivalentProjections(_)
            | Error::NoShadow => ErrorCategory::Solver,
            Error::AngleValidation { .. } | Error::NonUnitary(_) | Error::GammaTooSmall { .. } => {
                ErrorCategory::Validation
            }
            _ => ErrorCategory::Config,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
