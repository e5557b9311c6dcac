use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field exponent k={0} out of range 1..=8")]
    FieldExponent(u32),
    #[error("element bits {bits:#x} do not fit GF(2^{k})")]
    ElementRange { bits: u32, k: u8 },
    #[error("mixed-field operands: GF(2^{0}) and GF(2^{1})")]
    MixedField(u8, u8),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("modulus {0:#x} is reducible")]
    Reducible(u32),

    #[error("invalid hyperoval: {0}")]
    Hyperoval(String),
    #[error("hyperoval search exhausted for q={0}")]
    HyperovalSearch(usize),
    #[error("invalid class array: {0}")]
    ClassArray(String),
    #[error("invalid bijection set: {0}")]
    Sigma(String),

    #[error("invalid switching: {0}")]
    Switch(String),
    #[error("vertex pair must be distinct (got {0} twice)")]
    SamePair(usize),
    #[error("graph is not strongly regular with parameters (q^2(q+2), q(q+1), q, q): {0}")]
    WrongParameters(String),
    #[error("census cap exceeded: n={n} > cap={cap}")]
    CensusCap { n: usize, cap: usize },

    #[error("relation domain mismatch: expected {expected}, got {got}")]
    Domain { expected: usize, got: usize },
    #[error("basis relation {0} is out of range or empty")]
    EmptyRelation(u32),
    #[error("tuple cap exceeded: n^m = {tuples} > cap = {cap}")]
    TupleCap { tuples: u128, cap: u128 },
    #[error("refinement budget exceeded: {0}")]
    Budget(String),

    #[error("graph order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
