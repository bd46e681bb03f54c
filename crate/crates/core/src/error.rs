use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky pivot `index` fell below `threshold` (relative to the largest
    /// Gram diagonal entry).
    #[error(
        "rank-deficient Gram matrix: pivot {index} is {pivot:e}, below threshold {threshold:e}"
    )]
    RankDeficient {
        index: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("malformed QUBO document at `{field}`: {reason}")]
    Parse { field: String, reason: String },

    #[error(
        "{num_vars} variables exceeds the exhaustive-search budget of {limit}; use the annealing solver"
    )]
    BudgetExceeded { num_vars: usize, limit: usize },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Strips iteration context, returning the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Iteration { source, .. } => source.root(),
            other => other,
        }
    }
}
