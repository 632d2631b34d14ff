use thiserror::Error;

/// Errors raised by the arithmetic and the algorithms built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element is not a unit")]
    NonUnit,
    #[error("operands belong to different contexts")]
    ContextMismatch,
    #[error("negative p-adic valuation in a coefficient")]
    PrecisionLoss,
    #[error("not divisible by E(u){}", entry_suffix(.entry))]
    NotDivisible { entry: Option<(usize, usize)> },
    #[error("weights violate the genericity needed here: {0}")]
    GenericityViolation(String),
    #[error("pivot {0} is not a unit")]
    NonUnitPivot(&'static str),
    #[error("congruence check failed at step {step}, entry ({i},{j})")]
    CongruenceFailure { step: usize, i: usize, j: usize },
    #[error("membership check failed: {0}")]
    MembershipFailure(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("module admits no monodromy operator (v20 != 0)")]
    NoMonodromy,
    #[error("pi-adic truncation {got} too small, need at least {need}")]
    TruncationTooSmall { got: u32, need: u32 },
    #[error("exponent {exponent} at entry ({i},{j}) is not divisible by e")]
    ExponentNotDivisible { i: usize, j: usize, exponent: i64 },
    #[error("Hodge-Tate weights differ")]
    WeightMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn entry_suffix(entry: &Option<(usize, usize)>) -> String {
    match entry {
        Some((i, j)) => format!(" at entry ({i},{j})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
