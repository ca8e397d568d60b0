use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: time {time} (horizon {horizon}), cause {cause} (k = {k})")]
    IndexOutOfRange {
        time: usize,
        cause: usize,
        horizon: usize,
        k: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate centering distribution at bin {bin}: {reason}")]
    DegenerateCentering { bin: usize, reason: String },

    #[error("urn walk left the horizon of {horizon} bins (recurrency surrogate violated)")]
    HorizonExceeded { horizon: usize },

    #[error("observation at time {time} lies outside the horizon of {horizon} bins")]
    OutOfHorizon { time: usize, horizon: usize },

    #[error("inconsistent hazard input at bin {bin}: {reason}")]
    Inconsistent { bin: usize, reason: String },

    #[error("chain too short: {len} draws (need at least {min})")]
    ChainTooShort { len: usize, min: usize },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("row {row}: {message}")]
    Schema { row: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DegenerateCentering { .. } => "degenerate_centering",
            Error::HorizonExceeded { .. } => "horizon_exceeded",
            Error::OutOfHorizon { .. } => "out_of_horizon",
            Error::Inconsistent { .. } => "inconsistent",
            Error::ChainTooShort { .. } => "chain_too_short",
            Error::Optimizer(_) => "optimizer",
            Error::Schema { .. } => "schema",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
