use std::fmt;

/// A single failed feasibility constraint on a blocking matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// More zeros in total than the adversary's budget allows.
    BudgetExceeded { zeros: usize, budget: usize },
    /// More than one row blocked in the same slot (1-based).
    ColumnOverload { slot: usize, zeros: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BudgetExceeded { zeros, budget } => {
                write!(f, "budget {budget} exceeded: {zeros} blocked entries")
            }
            Violation::ColumnOverload { slot, zeros } => {
                write!(f, "slot {slot} has {zeros} blocked rows (at most 1 allowed)")
            }
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Shape {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("infeasible blocking matrix: {}", join_violations(.0))]
    Infeasible(Vec<Violation>),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("block length {length} exceeds budget {budget}")]
    OverBudget { length: usize, budget: usize },

    #[error("operation requires the {expected} model")]
    ModelMismatch { expected: &'static str },

    #[error("not a two-block row: found {blocks} zero blocks")]
    NotTwoBlock { blocks: usize },

    #[error("instance too large: {size} candidates exceeds cap {cap}")]
    OverCap { size: u128, cap: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
