use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid latent key: {0}")]
    InvalidKey(String),

    #[error("unknown variant `{value}` for {kind}")]
    UnknownVariant { kind: &'static str, value: String },

    #[error("invalid DGP specification: {0}")]
    InvalidDgp(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("local coordinate outside the unit ball (norm {0})")]
    OutsideBall(f64),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("no feasible candidate direction under the constraint")]
    InfeasibleConstraint,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} replications failed at n = {n} (first failure at replication {first}: {message})")]
    TooManyFailures {
        n: usize,
        failed: usize,
        total: usize,
        first: usize,
        message: String,
    },
}

impl Error {
    /// Whether the error stems from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Replicate { .. } | Error::TooManyFailures { .. } | Error::InfeasibleConstraint
        )
    }
}
