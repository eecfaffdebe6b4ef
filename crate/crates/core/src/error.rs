use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Write-verify programming ran out of pulses before reaching the target weight.
    #[error("programming did not converge to weight {target} within {budget} pulses (reached {reached})")]
    NonConvergence { target: f64, reached: f64, budget: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("value {0} is outside the pixel range [0, 255]")]
    OutOfRangeValue(f64),

    #[error("need at least {needed} inputs, got {available}")]
    TooFewInputs { needed: usize, available: usize },

    #[error("bad IDX magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated IDX payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("IDX payload has {extra} unexpected trailing bytes")]
    TrailingBytes { extra: usize },

    #[error("IDX dimensions overflow the addressable size")]
    DimensionOverflow,

    #[error("crop target {target_w}x{target_h} is larger than source {source_w}x{source_h}")]
    TargetTooLarge { target_w: usize, target_h: usize, source_w: usize, source_h: usize },

    #[error("requested {requested} images but the set holds {available}")]
    NotEnoughImages { requested: usize, available: usize },

    #[error("malformed {format} data: {reason}")]
    Malformed { format: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
