use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operation undefined for the zero field")]
    ZeroField,
    #[error("unresolved: {0}")]
    Unresolved(String),
    #[error("window lost the wave packet: boundary mass fraction {fraction:.3e}")]
    WindowLost { fraction: f64 },
    #[error("only {found} modes qualify for the fit, need {needed}")]
    TooFewModes { found: usize, needed: usize },
    #[error("iteration diverged at step {iteration}")]
    Diverged { iteration: usize, ratio_trace: Vec<f64> },
    #[error("sample is off the constraint surface (a = {a:.3e}, b = {b:.3e})")]
    OffSurface { a: f64, b: f64 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
