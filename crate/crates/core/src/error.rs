use thiserror::Error;

/// Errors raised by the numerical kernels, metrics and maps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is singular (smallest singular value {0:.3e})")]
    Singular(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("word of length {len} exceeds truncation level {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("generator {index} outside 1..={n}")]
    BadGenerator { index: usize, n: usize },

    #[error("target row norm {0} must lie in (0, 1)")]
    BadTarget(f64),

    #[error("kernel series diverges: {0}")]
    Divergent(String),

    #[error("tuple is not strictly inside the ball (row norm {0})")]
    NotStrict(f64),

    #[error("defect operator is singular (min eigenvalue of I - sum X X* is {0:.3e})")]
    DefectSingular(f64),

    #[error("tuples are not in a common Harnack part: {0}")]
    NotComparable(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("resolvent I - sum conj(lambda_i) X_i is singular")]
    ResolventSingular,

    #[error("inverse automorphism failed its probe (error {0:.3e})")]
    InversionProbeFailed(f64),

    #[error("point outside the open unit ball (norm {0})")]
    OutsideBall(f64),

    #[error("map expects {expected} generators, tuple has {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("map has zero sup-norm estimate")]
    ZeroMap,

    #[error("bad dimension: {0}")]
    BadDim(String),

    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
