use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected} atoms, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid polydisc: {0}")]
    InvalidPolydisc(String),

    #[error("shrink factor must lie in (0, 1], got {0}")]
    InvalidShrink(f64),

    #[error("node count {n} too small (need at least {min})")]
    TooFewNodes { n: usize, min: usize },

    #[error("exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("invalid measure space: {0}")]
    InvalidSpace(String),

    #[error("point {point} lies outside the domain {domain}")]
    OutsideDomain { point: String, domain: String },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("unknown family preset `{0}`")]
    UnknownFamily(String),

    #[error("no tabulated coefficients for atom parameter {0}")]
    UnknownAtom(String),

    #[error("invalid functional: {0}")]
    InvalidFunctional(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tail estimate diverges: fitted decay ratio {ratio} times shrink {shrink} is >= 1")]
    TailDiverges { ratio: f64, shrink: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
