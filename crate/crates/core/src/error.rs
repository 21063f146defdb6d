use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("rank mismatch: {0}")]
    RankMismatch(&'static str),

    #[error("field has nonzero mean {mean:e}; inversion is ill-posed")]
    NonzeroMean { mean: f64 },

    #[error("band index {j} outside [{min}, {max}]")]
    BandOutOfRange { j: i32, min: i32, max: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vacuum: 1 + a reached {min_density:e}")]
    Vacuum { min_density: f64 },

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
