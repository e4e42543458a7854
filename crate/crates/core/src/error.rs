use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("kernel not admissible: {0}")]
    KernelNotAdmissible(String),
    #[error("non-finite integrand value at node {index} ({location})")]
    NonFinite { index: usize, location: String },
    #[error("empty sample")]
    EmptySample,
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("bandwidth {value} is below the numerical floor {floor}")]
    BandwidthBelowFloor { value: f64, floor: f64 },
    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),
    #[error("unsupported dimension q = {0}")]
    UnsupportedDimension(usize),
    #[error("support mismatch: expected {expected}, found {found}")]
    SupportMismatch { expected: String, found: String },
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
