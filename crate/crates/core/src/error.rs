use thiserror::Error;

/// Errors produced by tensor, kernel and engine operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("axis {axis} out of range for a {ndim}-level tensor")]
    AxisOutOfRange { axis: usize, ndim: usize },

    #[error("invalid shape {0:?}: need 1..={max} levels, each of length >= 1", max = crate::MAX_LEVELS)]
    InvalidShape(Vec<usize>),

    #[error("data length {found} does not match shape product {expected}")]
    DataLength { expected: usize, found: usize },

    #[error("generator is not {mode}: {detail}")]
    InvalidSymmetry { mode: &'static str, detail: String },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("kernel integrity: {0}")]
    KernelIntegrity(String),

    #[error("branch id {id:#b} already has level {level} set")]
    BranchLevelSet { id: u32, level: usize },

    #[error("instance of {size} elements exceeds the dense oracle cap of {cap}")]
    OracleCap { size: usize, cap: usize },

    #[error("resource exhausted: {0}")]
    Resource(String),

    #[error("format: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
