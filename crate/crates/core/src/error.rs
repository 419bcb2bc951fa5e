use thiserror::Error;

/// Errors produced anywhere in the processing chain.
///
/// Variants are grouped by class so the command-line driver can map each
/// class onto its own exit code (see [`Error::class`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("ray does not intersect the ellipsoid")]
    NoIntersection,

    #[error("ground point is not visible: {0}")]
    NotVisible(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e} px)")]
    Convergence { iterations: usize, residual: f64 },

    #[error("degenerate dark reference: {0}")]
    DegenerateReference(String),

    #[error("invalid smear timing: {0}")]
    InvalidTiming(String),

    #[error("smear matrix is ill-conditioned (condition number {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient tie points: {found} survived, at least {required} required")]
    InsufficientTiePoints { found: usize, required: usize },

    #[error("calibration missing: {0}")]
    CalibrationMissing(String),

    #[error("calibration rejected: {0}")]
    CalibrationRejected(String),

    #[error("checksum mismatch in container")]
    Checksum,

    #[error("truncated container: {0}")]
    Truncated(String),

    #[error("unsupported container version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, one per CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Geometry,
    Calibration,
    Container,
    Config,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::Data(_) | Error::InsufficientData(_) => ErrorClass::Domain,
            Error::NoIntersection
            | Error::NotVisible(_)
            | Error::Convergence { .. }
            | Error::InsufficientTiePoints { .. } => ErrorClass::Geometry,
            Error::DegenerateReference(_)
            | Error::InvalidTiming(_)
            | Error::Conditioning { .. }
            | Error::CalibrationMissing(_)
            | Error::CalibrationRejected(_) => ErrorClass::Calibration,
            Error::Checksum | Error::Truncated(_) | Error::Version { .. } | Error::Format(_) => {
                ErrorClass::Container
            }
            Error::Config(_) => ErrorClass::Config,
            Error::Io(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
