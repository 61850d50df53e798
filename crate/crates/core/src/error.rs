use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid Laguerre indices: n = {n}, a = {a} (need n + a >= 0 for a < 0)")]
    LaguerreIndices { n: u32, a: i32 },

    #[error("grid count {count} is too small (need at least {min})")]
    GridTooSmall { count: usize, min: usize },

    #[error("grid count {count} does not resolve truncation dim {dim}")]
    GridTooCoarse { count: usize, dim: usize },

    #[error("invalid config: {key}: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("integrator step {step} exceeds stability bound {bound}")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("time series too short: {len} samples (need at least 16)")]
    SeriesTooShort { len: usize },

    #[error("envelope window {window} must exceed twice the median time step {median_dt}")]
    WindowTooNarrow { window: f64, median_dt: f64 },

    #[error("threshold {0} must lie in (0, 1)")]
    BadThreshold(f64),

    #[error("{0}")]
    Unsupported(String),

    #[error("empty point list")]
    EmptyPoints,

    #[error("config file: {0}")]
    ConfigFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
