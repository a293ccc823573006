//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the chart rectangle")]
    OutsideChart { x: f64, y: f64 },

    #[error("metric is not positive definite at ({x}, {y}) (min eigenvalue {min_eig})")]
    NotPositiveDefinite { x: f64, y: f64, min_eig: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("convexity lost at offset {requested}; largest admissible offset is {max_admissible}")]
    ConvexityLost { requested: f64, max_admissible: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("tangent length {requested} exceeds the exit time {exit_time}")]
    BeyondExit { requested: f64, exit_time: f64 },

    #[error("vector is not inward pointing (normal component {normal_component})")]
    NotInward { normal_component: f64 },

    #[error("no converged geodesic connection (best residual {residual})")]
    NoConnection { residual: f64 },

    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("malformed dataset at byte {offset}: {msg}")]
    Format { offset: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("too few boundary-trace sources: need {needed}, found {found}")]
    TooFewGammaSources { needed: usize, found: usize },

    #[error("no chart available for source {source_id} at sensor {sensor}")]
    ChartUnavailable { source_id: usize, sensor: usize },

    #[error("sigma set at sensor {sensor} is not closed")]
    SigmaNotClosed { sensor: usize },

    #[error("thin neighborhood: need {needed} usable neighbors, found {found}")]
    ThinNeighborhood { needed: usize, found: usize },

    #[error("rank deficient fit (condition number {condition})")]
    RankDeficient { condition: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry construction failed: {0}")]
    Geometry(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
