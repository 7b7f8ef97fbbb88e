use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cube depth {cube} exceeds function depth {function}")]
    DepthMismatch { cube: u32, function: u32 },
    #[error("desk-scale cap exceeded: n={n}, depth={depth} (caps: n=1→22, n=2→10, n=3→6)")]
    CapExceeded { n: usize, depth: u32 },
    #[error("clamp height must be non-negative, got {0}")]
    NegativeClamp(f64),
    #[error("representation depth {depth} too small for Haar order {order} (need ≥ {order}+1)")]
    DepthTooSmall { order: u32, depth: u32 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("gauge '{gauge}' is missing required flag '{flag}'")]
    FlagMissing { gauge: String, flag: &'static str },
    #[error("gauge '{0}' is not increasing; cannot invert")]
    NonIncreasingGauge(String),
    #[error("horizon {horizon} too small: threshold for level {level} not bracketed")]
    HorizonTooSmall { horizon: f64, level: u32 },
    #[error("point ({x1}, {x2}) outside Ω_{t}")]
    OutOfDomain { x1: f64, x2: f64, t: f64 },
    #[error("BMO^d norm {norm} exceeds parameter t = {t}")]
    NormExceedsT { norm: f64, t: f64 },
    #[error("no feasible starting point found for the extremal search")]
    InfeasibleStart,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not enough low points of the gauge below the scan horizon: found {found}, need {need}")]
    NotEnoughLowPoints { found: usize, need: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
