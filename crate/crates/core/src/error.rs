use thiserror::Error;

/// Errors raised anywhere in the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("duplicate declaration `{0}`")]
    Duplicate(String),
    #[error("relation `{name}` expects {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("equality across distinct sorts: `{0}` and `{1}`")]
    EqualitySort(String, String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("formula is not closed; free variables: {0}")]
    NotClosed(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("coupled universes differ on sort `{0}`")]
    CoupledMismatch(String),
    #[error("not a bijection: {0}")]
    NotBijective(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("labeling is not a partition: {0}")]
    NotPartition(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("unsupported shape: {0}")]
    Unsupported(String),
    #[error("not an equivalence relation at this scale: {0}")]
    NotEquivalence(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("size bound violated: {0}")]
    SizeBound(String),
    #[error("search budget exhausted (seed {seed})")]
    SearchExhausted { seed: u64 },
    #[error("resource ceiling of {limit} elementary evaluations exceeded")]
    ResourceCeiling { limit: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
