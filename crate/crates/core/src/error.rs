use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one of the stable
/// CLI exit codes through [`FlatError::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlatError {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },

    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("grid of {got} points is undersampled; need at least {required}")]
    Undersampled { required: usize, got: usize },

    #[error("work budget exceeded: {0}")]
    Budget(String),

    #[error("covariance matrix side {side} exceeds materialization cap {cap}; use the streaming report instead")]
    MatrixCap { side: usize, cap: usize },

    #[error("64-bit degree overflow at factor index {index}")]
    Overflow { index: usize },

    #[error("internal error: {0}")]
    Internal(String),
}

impl FlatError {
    /// 0 success, 2 input error, 3 budget, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            FlatError::InvalidPolynomial(_)
            | FlatError::InvalidInput(_)
            | FlatError::Parse { .. }
            | FlatError::InvalidConfig { .. }
            | FlatError::Undersampled { .. } => 2,
            FlatError::Budget(_) | FlatError::MatrixCap { .. } | FlatError::Overflow { .. } => 3,
            FlatError::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, FlatError>;
