use thiserror::Error;

/// Errors produced by the data loaders, the solver, and the model I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("expected at most two distinct labels, found {count} ({sample})")]
    TooManyLabels { count: usize, sample: String },

    #[error("invalid labels: {0}")]
    Labels(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid split: {0}")]
    Split(String),

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "Cholesky factorization of the {dim}x{dim} system failed even after adding a \
         diagonal shift of {shift:e}; the Gram matrix is numerically indefinite. \
         Rescale the features or increase rho1/rho2"
    )]
    Factorization { dim: usize, shift: f64 },

    #[error("dense {dim}x{dim} system exceeds the configured cap of {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("singular system in the dense reference solver ({0})")]
    Singular(String),

    #[error("non-finite value in `{var}` at iteration {iter}")]
    NonFinite { var: &'static str, iter: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
