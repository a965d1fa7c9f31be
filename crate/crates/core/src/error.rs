use thiserror::Error;

/// Errors raised by configuration checks and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("ZF needs more antennas than pilots: {antennas} antennas, tau_p = {tau_p}")]
    TooFewAntennas { antennas: usize, tau_p: usize },

    #[error("rank-deficient pilot observation at AP {ap}")]
    RankDeficient { ap: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("schedule search over {m} APs exceeds cap {cap}")]
    TooManyAps { m: usize, cap: usize },

    #[error("config parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
