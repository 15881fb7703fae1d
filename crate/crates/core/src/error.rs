use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Every variant maps onto a stable process exit code (see [`Error::exit_code`])
/// so the command-line front end can report failures without string matching.
#[derive(Debug, Error)]
pub enum Error {
    /// One or more invariants of a configuration were violated. All violations are listed.
    #[error("invalid spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("numerical blowup at t = {time}: {detail}")]
    NumericalBlowup { time: f64, detail: String },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("transform tail not converged: bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailNotConverged { bound: f64, tolerance: f64 },

    #[error("impedance has a pole at s = 0")]
    PoleAtZero,

    #[error("degenerate curve: min metric {min_metric:e} below threshold")]
    DegenerateCurve { min_metric: f64 },

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(vec![msg.into()])
    }

    /// Process exit code: 2 validation, 3 numerical blowup, 4 convergence or tail failure, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) | Error::Parse(_) | Error::PoleAtZero => 2,
            Error::NumericalBlowup { .. } => 3,
            Error::ConvergenceFailure(_) | Error::TailNotConverged { .. } => 4,
            Error::DegenerateCurve { .. } => 2,
            Error::Io(_) => 1,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NumericalBlowup { .. } => "NumericalBlowup",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::TailNotConverged { .. } => "TailNotConverged",
            Error::PoleAtZero => "PoleAtZero",
            Error::DegenerateCurve { .. } => "DegenerateCurve",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
