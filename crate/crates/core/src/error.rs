use thiserror::Error;

/// Errors produced by the mapping, downsampling and planning routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected at least {needed} points, got {got}")]
    EmptyInput { needed: usize, got: usize },

    #[error("input points are affinely dependent (collinear in 2-D, coplanar in 3-D)")]
    DegenerateInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}; only 2 and 3 are supported")]
    UnsupportedDimension(usize),

    #[error("coordinate is not finite: {0}")]
    NonFinite(f64),

    #[error("invalid box: min exceeds max on axis {axis}")]
    InvertedBox { axis: usize },

    #[error("invalid parameter: {0}")]
    InvalidSpec(String),

    #[error("point #{index} at {coords:?} lies outside the domain")]
    PointOutOfDomain { index: usize, coords: Vec<f64> },

    #[error("depth cap {cap} would be exceeded")]
    DepthCapExceeded { cap: u32 },

    #[error("start cell is out of bounds")]
    StartOutOfBounds,

    #[error("goal cell is out of bounds")]
    GoalOutOfBounds,

    #[error("start cell is occupied (refinement round {round})")]
    StartOccupied { round: usize },

    #[error("goal cell is occupied (refinement round {round})")]
    GoalOccupied { round: usize },

    #[error("no path found after {rounds} refinement rounds")]
    NoPathAtMaxDepth { rounds: usize },

    #[error("planning requires a 2-D map, got {0}-D")]
    NotPlanar(usize),

    #[error("invalid shape #{index}: {reason}")]
    InvalidShape { index: usize, reason: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for both the start- and goal-occupied variants.
    pub fn is_start_or_goal_occupied(&self) -> bool {
        matches!(self, Error::StartOccupied { .. } | Error::GoalOccupied { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
