use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("base {0} is not a supported prime (2 <= b <= 251)")]
    InvalidBase(u32),

    #[error("value {0} is outside [0, 1)")]
    Domain(f64),

    #[error("digit {digit} is not valid in base {base}")]
    InvalidDigit { digit: u32, base: u32 },

    #[error("precision {0} is outside the supported range 1..={max}", max = crate::badic::MAX_DIGITS)]
    InvalidPrecision(usize),

    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),

    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(usize, usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {what} (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: u64,
        limit: u64,
    },

    #[error("unsupported construction: {0}")]
    UnsupportedConstruction(String),

    #[error("{what} is too large for exact computation ({work} > {limit})")]
    TooLarge {
        what: &'static str,
        work: u128,
        limit: u128,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown integrand '{0}'")]
    UnknownIntegrand(String),

    #[error("integrand '{0}' has no derivative evaluator")]
    MissingDerivative(String),

    #[error("direction number file, line {line}: {msg}")]
    DirectionNumbers { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
