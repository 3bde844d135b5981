use thiserror::Error;

/// Errors raised by grid construction, density evaluation and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: functions live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tail mass exceeds budget: estimated {mass:.3e} beyond |x| > {half_width} (budget {budget:.1e})")]
    TailBudget {
        mass: f64,
        half_width: f64,
        budget: f64,
    },

    #[error("score undefined at t=0")]
    ScoreUndefinedAtZero,

    #[error("input density is not symmetric about 0 (max asymmetry {0:.3e}); pass --symmetrize to enforce")]
    Asymmetric(f64),

    #[error("absolute continuity on grid violated at x = {0}")]
    AbsoluteContinuity(f64),

    #[error("variance mismatch: supplied {supplied}, measured on grid {measured}")]
    VarianceMismatch { supplied: f64, measured: f64 },

    #[error("unknown theta functional `{0}` (expected quadratic or plog)")]
    UnknownTheta(String),

    #[error("cannot parse density spec `{0}`")]
    FamilySpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
