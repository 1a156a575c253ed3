use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum HsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The radicand of the projection corrector went negative beyond tolerance,
    /// which means the datum violates `dmu_ac = u_x^2 dx`.
    #[error("inconsistent datum on even cell {cell}: radicand {radicand:e} < 0")]
    Consistency { cell: i64, radicand: f64 },

    #[error("cannot evolve backwards: requested t = {requested}, state is at t = {current}")]
    InvalidTime { requested: f64, current: f64 },

    #[error("corrupt Lagrangian state: {0}")]
    CorruptState(String),

    #[error("measures have different total mass ({left} vs {right})")]
    MassMismatch { left: f64, right: f64 },

    #[error("tolerance not reached: {0}")]
    Tolerance(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HsError {
    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            HsError::InvalidInput(_)
            | HsError::Config(_)
            | HsError::UnsupportedMode(_)
            | HsError::Json(_)
            | HsError::Io(_)
            | HsError::Csv(_) => 2,
            HsError::Consistency { .. }
            | HsError::InvalidTime { .. }
            | HsError::CorruptState(_)
            | HsError::MassMismatch { .. }
            | HsError::Tolerance(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HsError>;
