use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contraction violation: {0}")]
    ContractionViolation(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("numerical degeneracy: {0}")]
    Degeneracy(String),
    #[error("discretization error: {0}")]
    Discretization(String),
    #[error("quadrature error: {0}")]
    Quadrature(String),
    #[error("schedule infeasible: deepest feasible level {deepest}; {msg}")]
    ScheduleInfeasible { deepest: usize, msg: String },
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("class violation: {0}")]
    ClassViolation(String),
    #[error("data inconsistency: {0}")]
    DataInconsistency(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("moment inconsistency: {0}")]
    MomentInconsistency(String),
    #[error("conditioning error: {0}")]
    Conditioning(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ContractionViolation(_) => "contraction violation",
            Error::Resolution(_) => "resolution error",
            Error::Domain(_) => "domain error",
            Error::Numerical(_) => "numerical error",
            Error::Degeneracy(_) => "numerical degeneracy",
            Error::Discretization(_) => "discretization error",
            Error::Quadrature(_) => "quadrature error",
            Error::ScheduleInfeasible { .. } => "schedule infeasible",
            Error::Truncation(_) => "truncation error",
            Error::InsufficientData(_) => "insufficient data",
            Error::Geometry(_) => "geometry error",
            Error::ClassViolation(_) => "class violation",
            Error::DataInconsistency(_) => "data inconsistency",
            Error::IllConditioned(_) => "ill-conditioned fit",
            Error::MomentInconsistency(_) => "moment inconsistency",
            Error::Conditioning(_) => "conditioning error",
            Error::Config(_) => "config error",
            Error::Io(_) => "io error",
        }
    }

    /// Process exit code: 2 for invalid input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ContractionViolation(_)
            | Error::Domain(_)
            | Error::Config(_)
            | Error::Geometry(_)
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
