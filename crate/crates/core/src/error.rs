use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("absolute continuity violated at symbol {symbol}: p = {p}, q = 0")]
    AbsoluteContinuityViolation { symbol: usize, p: f64 },

    #[error("axis error: {0}")]
    Axis(String),

    #[error("sequence length {got} does not match n = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input law variant not admissible for {scenario}: {reason}")]
    LawVariant { scenario: String, reason: String },

    #[error("no swept input law matches the target output within tolerance {tol}")]
    NoFeasibleLaw { tol: f64 },

    #[error("endpoint laws induce different output statistics (max deviation {deviation:e})")]
    TargetMismatch { deviation: f64 },

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("input law infeasible: {0}")]
    InfeasibleLaw(String),

    #[error("zero marginal P(x1 = {symbol}) = 0; strategy domain must be restricted to the support")]
    ZeroMarginal { symbol: usize },

    #[error("negative mutual information {0:e} beyond floating-point slack")]
    NegativeInformation(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable kind, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::AbsoluteContinuityViolation { .. } => "AbsoluteContinuityViolation",
            Error::Axis(_) => "AxisError",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::LawVariant { .. } => "LawVariantError",
            Error::NoFeasibleLaw { .. } => "NoFeasibleLaw",
            Error::TargetMismatch { .. } => "TargetMismatch",
            Error::GuardExceeded(_) => "GuardExceeded",
            Error::InfeasibleLaw(_) => "InfeasibleLaw",
            Error::ZeroMarginal { .. } => "ZeroMarginal",
            Error::NegativeInformation(_) => "NegativeInformation",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
