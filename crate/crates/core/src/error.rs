use thiserror::Error;

/// Errors raised by space construction and by the analysis operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a space needs at least one atom")]
    EmptySpace,

    #[error("atom {id} has non-positive mass {mass}")]
    NonPositiveMass { id: u64, mass: f64 },

    #[error("non-finite number in {0}")]
    NonFinite(String),

    #[error("duplicate atom id {0}")]
    DuplicateAtomId(u64),

    #[error("metric axiom violated at atoms ({a}, {b}, {c}): {reason}")]
    MetricAxiomViolation {
        a: u64,
        b: u64,
        c: u64,
        reason: String,
    },

    #[error("coordinate dimension mismatch: expected {expected}, atom {id} has {found}")]
    DimensionMismatch { id: u64, expected: usize, found: usize },

    #[error("unknown atom {0}")]
    UnknownAtom(u64),

    #[error("function has no value for atom {0}")]
    MissingValue(u64),

    #[error("function has {found} values for a space with {expected} atoms")]
    ValueCountMismatch { expected: usize, found: usize },

    #[error("space does not have the dyadic counterexample shape")]
    WrongSpaceShape,

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("step function does not vanish at infinity (final value {0})")]
    NotVanishing(f64),

    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),

    #[error("M must be positive, got {0}")]
    NonPositiveM(f64),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("empty level set at lambda = {0}")]
    EmptyLevelSet(f64),

    #[error("atom {0} is not in E")]
    NotInE(u64),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
