use std::fmt;

/// Failure classes mapped to process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// Bad flags, config keys or parameter values; exit code 1.
    Usage(String),
    /// A numerical routine failed; exit code 2.
    Numeric(String),
    /// Input data could not be read or is unusable; exit code 3.
    Data(String),
}

impl SimError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Usage(_) => 1,
            SimError::Numeric(_) => 2,
            SimError::Data(_) => 3,
        }
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Usage(m) => write!(f, "usage error: {m}"),
            SimError::Numeric(m) => write!(f, "numerical failure: {m}"),
            SimError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<dirlin::Error> for SimError {
    fn from(e: dirlin::Error) -> Self {
        use dirlin::Error as E;
        let msg = e.to_string();
        match e {
            E::Numerical(_) | E::NonFinite { .. } => SimError::Numeric(msg),
            E::UnknownModel(_)
            | E::InvalidParameter(_)
            | E::InvalidBandwidth(_)
            | E::BandwidthBelowFloor { .. }
            | E::KernelNotAdmissible(_)
            | E::UnsupportedDimension(_) => SimError::Usage(msg),
            E::Domain(_)
            | E::EmptySample
            | E::InsufficientData { .. }
            | E::SupportMismatch { .. }
            | E::DegenerateSample(_)
            | E::Parse { .. }
            | E::Io(_) => SimError::Data(msg),
        }
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Data(e.to_string())
    }
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Data(e.to_string())
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;
