use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("target {index} is {distance:.3e} from the source curve, inside the near zone of width {zone:.3e}")]
    NearZone {
        index: usize,
        distance: f64,
        zone: f64,
    },

    #[error("collision: target {index} coincides with the source curve (distance {distance:.3e})")]
    Collision { index: usize, distance: f64 },

    #[error("GMRES stopped after {iterations} iterations with relative residual {residual:.3e}")]
    GmresNotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("vesicles overlap or left the fluid domain: {0}")]
    Overlap(String),

    #[error("unrecoverable step at t = {time}: {reason}")]
    UnrecoverableStep { time: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that an adaptive driver should answer by retrying with a
    /// smaller step instead of aborting the run.
    pub fn is_step_rejection(&self) -> bool {
        matches!(
            self,
            Error::Collision { .. }
                | Error::GmresNotConverged { .. }
                | Error::Singular(_)
                | Error::Overlap(_)
        )
    }
}
