use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch: fields live on n={left} and n={right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("block index {j} outside [-1, {j_max}]")]
    BlockOutOfRange { j: i32, j_max: i32 },

    #[error("no signal: all blocks in the fit range vanish")]
    NoSignal,

    #[error("invalid fit range [{lo}, {hi}] for j_max = {j_max}")]
    InvalidFitRange { lo: i32, hi: i32, j_max: i32 },

    #[error("empty positive-time range")]
    EmptyTimeRange,

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("time grids differ: {0}")]
    TimeMismatch(String),

    #[error("time index {index} out of range (len {len})")]
    TimeIndexOutOfRange { index: usize, len: usize },

    #[error("non-positive time step dt = {0}")]
    NonPositiveStep(f64),

    #[error("insufficient burn-in: {0}")]
    InsufficientBurnIn(String),

    #[error("theta = {0} outside (7/4, 2]")]
    ThetaOutOfRange(f64),

    #[error("kappa ratio outside (1/3, 2/3): kappa/kappa' = {0}")]
    KappaRatio(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no local solution at this resolution (T fell below {min_t})")]
    NoLocalSolution { min_t: f64 },

    #[error("step-size guard tripped: |u|_inf * dt = {0} > 0.5")]
    StepSize(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("bad snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
