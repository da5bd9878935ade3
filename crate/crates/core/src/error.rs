use std::fmt;

/// Which sweep of the backward-forward algorithm failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pass {
    Backward,
    Forward,
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pass::Backward => f.write_str("backward"),
            Pass::Forward => f.write_str("forward"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition of an operation was not met by its caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("infeasible at index {index} during {pass} pass")]
    Infeasible { index: usize, pass: Pass },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    /// Both ends of a segment have zero speed, so the segment is never left.
    #[error("traversal time diverges on segment {segment}")]
    Diverged { segment: usize },

    #[error("grid sizes are not aligned with the reference grid: {0}")]
    Alignment(String),

    /// A sweep entry failed; `at` names the entry.
    #[error("sweep failed at {at}: {source}")]
    Sweep {
        at: String,
        #[source]
        source: Box<Error>,
    },

    /// A property the harness asserts on its own results did not hold.
    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
