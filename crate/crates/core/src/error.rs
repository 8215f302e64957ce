use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// 1-based index tuple of the first negative off-diagonal entry.
    #[error("tensor is not Metzler: off-diagonal entry {index:?} = {value}")]
    NotMetzler { index: Vec<usize>, value: f64 },

    #[error("dimension {dim} exceeds the enumeration limit of {limit}")]
    UnsupportedSize { dim: usize, limit: usize },

    /// A hypergraph does not satisfy the preconditions of the requested construction.
    #[error("edge {edge}: {reason}")]
    SpecViolation { edge: usize, reason: String },

    #[error("no edges of order {0}")]
    EmptyLayer(usize),

    #[error("tensor is reducible: {0}")]
    Reducible(String),

    #[error("power iteration did not converge after {iterations} iterations (last gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); last state {state:?}")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },

    #[error("{context}: {message}")]
    Schema { context: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            context: context.into(),
            message: message.into(),
        }
    }
}
