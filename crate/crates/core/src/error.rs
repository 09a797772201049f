use thiserror::Error;

/// Errors raised by the geometry engine.
///
/// Numbers are carried as `f64` regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid metric at t={t}, x={x:?}: {reason}")]
    InvalidMetric { t: f64, x: [f64; 2], reason: String },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error at t={t}, x={x:?}: {message}")]
    Evaluation { t: f64, x: [f64; 2], message: String },

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("regions live on different grids")]
    GridMismatch,

    #[error("CFL violation at t={t}: optical speed {speed} with dt={dt} exceeds the bound for dx={dx}")]
    CflViolation { t: f64, speed: f64, dt: f64, dx: f64 },

    #[error("time {t} outside horizon [{lo}, {hi}]")]
    OutsideHorizon { t: f64, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inclusion chain violated: {0}")]
    ChainViolation(String),

    #[error("pair transport failed: {0}")]
    Transport(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("region escapes the grid: {0}")]
    Escape(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
