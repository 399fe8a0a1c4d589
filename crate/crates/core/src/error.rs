use thiserror::Error;

/// Error type shared by every module in this crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("negative squeezing parameter r = {0}")]
    NegativeSqueezing(f64),

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("invalid mode reference: {0}")]
    InvalidMode(String),

    #[error("singular teleportation gate: {0}")]
    SingularGate(String),

    #[error("edge magnitudes are not uniform; no common rescaling parameter")]
    MixedMagnitudes,

    #[error("above threshold: {0}")]
    AboveThreshold(String),

    #[error("numerical blow-up at t = {t_s:.3e} s")]
    BlowUp { t_s: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
