use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("kernel matrix is singular (zero determinant)")]
    SingularKernel,

    #[error("behavior is the zero signal (determinant is a nonzero constant)")]
    ZeroBehavior,

    /// Some column subset of the requested size is not left unimodular.
    #[error("column subset {witness:?} is not left unimodular")]
    NotReducible { witness: Vec<usize> },

    #[error("matrix has no polynomial left inverse")]
    NoLeftInverse,

    #[error("stacked [M; D] is not left unimodular")]
    NotObservable,

    #[error("signal horizon {horizon} too short, need at least {required}")]
    HorizonTooShort { horizon: usize, required: usize },

    /// Two equivalence classes share the largest vote count.
    #[error("majority vote tie, class sizes {tally:?}")]
    MajorityTie { tally: Vec<usize> },

    #[error("GCD(c_{index}, a) is not 1; form is not maximally secure")]
    NotMaximallySecure { index: usize },

    #[error("inconsistent security index: {0}")]
    InconsistentIndex(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
