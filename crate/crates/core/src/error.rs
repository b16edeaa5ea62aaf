use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),

    #[error("modulus mismatch: GF({0}) vs GF({1})")]
    ModulusMismatch(u64, u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("algebra mismatch: operands live over different algebras")]
    AlgebraMismatch,

    #[error("not finite dimensional within budget: paths of length {0} do not all reduce to zero")]
    RadicalNotNilpotent(usize),

    #[error("relation ideal not admissible: {0}")]
    NotAdmissible(String),

    #[error("resolution budget of {0} exhausted")]
    BudgetExhausted(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
