use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("group element {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("tuple shape mismatch: {0}")]
    Shape(String),

    #[error("k = {k} outside the admissible range [{lo}, {hi}]")]
    KOutOfRange { k: usize, lo: usize, hi: usize },

    #[error("maximum diagonal is only defined for scalar tuples (got dimension {0})")]
    NotScalar(usize),

    #[error("ambiguous coincidence pattern: coordinates {i} and {j} are {distance:e} apart, inside the band ({lo:e}, {hi:e})")]
    AmbiguousPattern {
        i: usize,
        j: usize,
        distance: f64,
        lo: f64,
        hi: f64,
    },

    #[error("tuple lies in the maximum diagonal: its maximum is attained {multiplicity} >= {k} times")]
    NotInW { multiplicity: usize, k: usize },

    #[error("majority block requires k > q/2 (k = {k}, q = {q})")]
    KTooSmall { k: usize, q: usize },

    #[error("tuple is not in the k-stratum: largest coincidence block has size {largest}, expected exactly {k}")]
    NotInStratum { largest: usize, k: usize },

    #[error("map evaluation failed: {0}")]
    Evaluation(String),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("linear algebra: {0}")]
    LinearAlgebra(String),

    #[error("connectivity assertion failed in degree {degree}: reduced Betti number {value} where vanishing was claimed through degree {bound}")]
    AssertionFailure { degree: i64, value: usize, bound: i64 },

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("no start converged: best residual {best_residual:e} after {starts} starts")]
    BudgetExhausted { best_residual: f64, starts: usize },

    #[error("no sign change found on a grid of {grid} points")]
    ResolutionTooCoarse { grid: usize },

    #[error("scenario: {0}")]
    Scenario(String),
}

impl Error {
    /// Errors caused by malformed or out-of-range input rather than by a
    /// failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::NotPrime(_)
                | Error::IndexOutOfRange { .. }
                | Error::Shape(_)
                | Error::KOutOfRange { .. }
                | Error::NotScalar(_)
                | Error::KTooSmall { .. }
                | Error::Parse { .. }
                | Error::Scenario(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
