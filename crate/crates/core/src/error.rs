use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the diagram, relation and absorption operations.
///
/// Invariant violations of well-formed inputs are reported through
/// [`crate::report::ValidationReport`] instead; these are hard failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level} out of range (depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("enumerating {count} paths exceeds the cap of {cap}")]
    CapExceeded { count: String, cap: usize },
    #[error("unknown vertex `{id}` at level {level}")]
    UnknownVertex { level: usize, id: String },
    #[error("unknown edge `{id}` at level {level}")]
    UnknownEdge { level: usize, id: String },
    #[error("duplicate {kind} id `{id}` at level {level}")]
    DuplicateId { kind: &'static str, level: usize, id: String },
    #[error("level {level} skips past the current depth {depth}")]
    LevelGap { level: usize, depth: usize },
    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },
    #[error("map is not a bijection: {0}")]
    NotBijective(String),
    #[error("invalid cut list: {0}")]
    InvalidCuts(String),
    #[error("diagram is not simple within its depth (no window at levels {levels:?})")]
    NotSimple { levels: Vec<usize> },
    #[error("step budget of {budget} exhausted: {reason}")]
    StepBudgetExhausted { budget: usize, reason: String },
    #[error("relations live on different point sets")]
    PointSetMismatch,
    #[error("not a partition: {0}")]
    NotPartition(String),
    #[error("not a permutation: {0}")]
    NotPermutation(String),
    #[error("action is not free: {element} fixes {point}")]
    NotFree { point: String, element: String },
    #[error("chain is not nested at index {index}")]
    NotNested { index: usize },
    #[error("chain must start with the diagonal")]
    ChainNotRooted,
    #[error("relations are not transverse: {0}")]
    NotTransverse(String),
    #[error("witness does not belong to these relations")]
    WitnessMismatch,
    #[error("capacity conditions fail: {0}")]
    Capacity(String),
    #[error("construction inconsistency: {0}")]
    Inconsistent(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
