use thiserror::Error;

/// Errors surfaced by fallible operations across the crate.
///
/// Dimension bugs on hot paths (evaluating a point of the wrong width,
/// indexing a variable outside the ambient cube) are treated as programming
/// errors and panic via `assert!`; this enum covers conditions a caller can
/// plausibly hit with well-formed code: size limits, malformed inputs from
/// files, statistical budgets running out.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operand dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("explicit truth table over {n} variables exceeds the {max}-variable cap")]
    TableTooLarge { n: usize, max: usize },

    #[error("not a permutation of 0..{n}")]
    InvalidPermutation { n: usize },

    #[error("invalid variable set: {0}")]
    InvalidVarSet(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("exact computation requires n <= {max}, got n = {n}")]
    ExactPathTooLarge { n: usize, max: usize },

    #[error("exact-fraction noise requires n <= {max} so flips can be materialized, got n = {n}")]
    ExactFractionScale { n: usize, max: usize },

    #[error("oracle access discipline violated: {0}")]
    PhaseViolation(String),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("arity {k} exceeds the permutation-scan budget {max}")]
    PermutationBudget { k: usize, max: usize },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("gave up drawing a typical core after {attempts} attempts")]
    TypicalityBudgetExhausted { attempts: u64 },

    #[error("malformed descriptor: {0}")]
    Descriptor(String),

    #[error("malformed report: {0}")]
    Report(String),

    #[error("report I/O on {path}: {source}")]
    ReportIo {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
